#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "sbmiqp/bench.hpp"
#include "sbmiqp/driver.hpp"
#include "sbmiqp/errors.hpp"
#include "sbmiqp/parse.hpp"

namespace {

using namespace sbmiqp;

volatile std::sig_atomic_t g_interrupted = 0;

void on_interrupt(int) { g_interrupted = 1; }

std::string fmt_obj(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_y(const Eigen::VectorXd& y) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < y.size(); ++i) {
        if (i) os << ", ";
        os << static_cast<long long>(std::llround(y[i]));
    }
    os << ")";
    return os.str();
}

ModelMinlp select_builtin(const std::string& name, unsigned seed) {
    if (name == "tutorial") return tutorial_problem();
    if (name == "nonconvex1d") return nonconvex_integer_problem();
    if (name.rfind("ocp:", 0) == 0) {
        OcpSpec spec;
        spec.N = std::stoi(name.substr(4));
        return unstable_ocp(spec);
    }
    if (name == "random") return random_convex_minlp(seed, 2, 2);
    throw CLI::ValidationError("--builtin", "unknown builtin '" + name +
                                                "' (expected tutorial, nonconvex1d, ocp:N, random)");
}

Eigen::VectorXd parse_y0(const std::string& text) {
    std::vector<double> vals;
    std::string tok;
    std::istringstream is(text);
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        vals.push_back(std::stod(tok));
    }
    Eigen::VectorXd y(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) y[static_cast<int>(i)] = vals[i];
    return y;
}

void print_table(const Trace& trace) {
    std::printf("%4s  %10s  %10s  %5s  %-16s  %10s  %10s\n", "k", "LB", "UB", "b(k)", "y_k",
                "J(y_k)", "V_k");
    bool any_infeasible = false;
    for (std::size_t i = 0; i < trace.iters.size(); ++i) {
        const TraceIter& it = trace.iters[i];
        std::string j_col = fmt_obj(it.value);
        if (!it.feasible) {
            j_col += "*";
            any_infeasible = true;
        }
        const std::string v_col = i == 0 ? "-" : fmt_obj(trace.iters[i - 1].V);
        std::printf("%4d  %10s  %10s  %5d  %-16s  %10s  %10s\n", it.k, fmt_obj(it.lb).c_str(),
                    fmt_obj(it.ub).c_str(), it.best_index, fmt_y(it.y).c_str(), j_col.c_str(),
                    v_col.c_str());
    }
    if (any_infeasible)
        std::printf("  * infeasible proposal; value shown is the projection distance\n");
}

void write_cuts_csv(const std::string& path, const Dataset& ds, int ny) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open cuts file '" + path + "'");
    out << "kind,record,corrected,sigma,rhs";
    for (int j = 0; j < ny; ++j) out << ",a" << j;
    out << "\n";
    for (int i = 0; i < ds.size(); ++i) {
        const EvalRecord& rec = ds[i];
        if (rec.feasible) {
            const EpigraphRow row = epigraph_row(rec);
            out << "benders," << i << "," << (rec.corrected ? 1 : 0) << ",0," << row.b;
            for (int j = 0; j < ny; ++j) out << "," << row.a[j];
        } else {
            const CutRow row = infeasibility_row(rec);
            out << "infeasibility," << i << ",0," << rec.sigma << "," << row.b;
            for (int j = 0; j < ny; ++j) out << "," << row.a[j];
        }
        out << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_interrupt);

    CLI::App app{"sbmiqp - sequential Benders-based MIQP solver for MINLPs"};
    std::string problem_path, builtin, hessian = "exact", stop = "heuristic", y0_text;
    std::string trace_path, cuts_path;
    DriverOptions opts;
    unsigned seed = 0;
    app.add_option("problem", problem_path, "problem JSON file");
    app.add_option("--builtin", builtin, "built-in benchmark: tutorial, nonconvex1d, ocp:N, random");
    app.add_option("--alpha", opts.alpha, "Benders region interpolation weight in (0,1]");
    app.add_option("--rho", opts.rho, "corrected-gradient amplification factor (>= 1)");
    app.add_option("--gap", opts.gap, "master MIP relative gap");
    app.add_option("--tol", opts.tol_abs, "absolute termination tolerance");
    app.add_option("--rtol", opts.tol_rel, "relative termination tolerance");
    app.add_option("--hessian", hessian, "hessian mode: exact, gn, zero")
        ->check(CLI::IsMember({"exact", "gn", "zero"}));
    app.add_option("--pool", opts.pool_size, "master solution pool size");
    app.add_option("--y0", y0_text, "initial integer point, comma separated");
    app.add_flag_callback("--no-safeguards", [&] { opts.safeguards = false; },
                          "disable gradient correction and cut offsets");
    app.add_option("--stop", stop, "stopping rule: exact, heuristic")
        ->check(CLI::IsMember({"exact", "heuristic"}));
    app.add_option("--time-limit", opts.time_limit, "wall time limit in seconds (0 = none)");
    app.add_option("--max-iter", opts.max_iter, "outer iteration limit");
    app.add_option("--trace", trace_path, "write iteration trace JSON to this path");
    app.add_option("--cuts-csv", cuts_path, "write final cut rows as CSV to this path");
    app.add_option("--seed", seed, "seed for the random builtin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (problem_path.empty() == builtin.empty()) {
            std::cerr << "error: give exactly one of a problem file or --builtin\n";
            return 1;
        }
        ModelMinlp model =
            builtin.empty() ? parse_problem(problem_path) : select_builtin(builtin, seed);

        opts.hessian = hessian == "gn"     ? HessianMode::GaussNewton
                       : hessian == "zero" ? HessianMode::Zero
                                           : HessianMode::Exact;
        opts.stop = stop == "exact" ? StopRule::Exact : StopRule::Heuristic;
        if (!y0_text.empty()) {
            opts.y0 = parse_y0(y0_text);
        } else if (builtin == "tutorial") {
            // canonical starting point of the reference iteration table
            opts.y0 = parse_y0("0,4");
        }
        opts.cancel = [] { return g_interrupted != 0; };

        const SolveResult res = run(model, opts);

        print_table(res.trace);
        std::printf("status: %s\n", to_string(res.status).c_str());
        if (std::isfinite(res.objective)) {
            std::printf("objective: %.6f at y = %s\n", res.objective, fmt_y(res.y).c_str());
        }
        std::printf("lower bound: %s, iterations: %d\n", fmt_obj(res.lb).c_str(),
                    res.iterations);

        if (!trace_path.empty()) {
            std::ofstream out(trace_path);
            if (!out) throw std::runtime_error("cannot open trace file '" + trace_path + "'");
            out << res.trace.to_json(to_string(res.status), res.objective, res.lb, res.x, res.y);
        }
        if (!cuts_path.empty()) write_cuts_csv(cuts_path, res.dataset, model.ny);

        switch (res.status) {
            case SolveStatus::Optimal:
            case SolveStatus::Feasible: return 0;
            case SolveStatus::Infeasible: return 2;
            case SolveStatus::IterationLimit:
            case SolveStatus::TimeLimit: return 3;
        }
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
