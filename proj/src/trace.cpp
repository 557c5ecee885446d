#include "sbmiqp/trace.hpp"

#include <json.hpp>

namespace sbmiqp {

namespace {

nlohmann::json to_array(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

} // namespace

std::string Trace::to_json(const std::string& status, double objective, double lb,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    nlohmann::json j;
    j["trace_version"] = trace_version;
    nlohmann::json arr = nlohmann::json::array();
    for (const TraceIter& it : iters) {
        nlohmann::json e;
        e["k"] = it.k;
        e["lb"] = it.lb;
        e["ub"] = it.ub;
        e["best_index"] = it.best_index;
        e["y"] = to_array(it.y);
        e["feasible"] = it.feasible;
        e["value"] = it.value;
        e["master"] = it.master;
        e["V"] = it.V;
        e["corrections"] = it.corrections;
        e["positive_sigmas"] = it.positive_sigmas;
        e["extra_evals"] = it.extra_evals;
        e["t_nlp"] = it.t_nlp;
        e["t_mip"] = it.t_mip;
        arr.push_back(std::move(e));
    }
    j["iterations"] = std::move(arr);
    j["result"] = {
        {"status", status},
        {"objective", objective},
        {"lb", lb},
        {"x", to_array(x)},
        {"y", to_array(y)},
    };
    // non-finite doubles serialize as null
    return j.dump(2);
}

} // namespace sbmiqp
