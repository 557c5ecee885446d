#ifndef SBMIQP_DRIVER_HPP
#define SBMIQP_DRIVER_HPP

#include <functional>
#include <optional>

#include "sbmiqp/cuts.hpp"
#include "sbmiqp/mipsolve.hpp"
#include "sbmiqp/model.hpp"
#include "sbmiqp/nlpsolve.hpp"
#include "sbmiqp/trace.hpp"

namespace sbmiqp {

enum class HessianMode { Exact, GaussNewton, Zero };
enum class StopRule { Exact, Heuristic };

struct DriverOptions {
    double alpha = 0.2;    // region interpolation weight in (0, 1]
    double rho = 1.5;      // gradient amplification factor, >= 1
    HessianMode hessian = HessianMode::Exact;
    double gap = 1e-4;     // master MIP relative gap
    double tol_abs = 1e-2;
    double tol_rel = 1e-2;
    int max_iter = 100;
    double time_limit = 0.0;  // seconds; 0 = none
    std::optional<Eigen::VectorXd> y0;
    bool safeguards = true;
    StopRule stop = StopRule::Heuristic;
    int pool_size = 1;
    std::optional<Eigen::VectorXd> w_diag;  // diagonal of W; default identity
    NlpOptions nlp;
    std::function<bool()> cancel;  // cooperative cancellation, polled between subproblems
};

enum class SolveStatus { Optimal, Feasible, Infeasible, IterationLimit, TimeLimit };

std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    Eigen::VectorXd x, y;
    double objective = 0.0;  // best value found (upper bound)
    double lb = 0.0;
    int iterations = 0;
    Trace trace;
    Dataset dataset;
};

SolveResult run(const ModelMinlp& model, const DriverOptions& opts = DriverOptions());

/// Master problem assembly, exposed for testing. best must be a valid
/// dataset index; J_bar is only used for the region rows of feasible records.
MiqpInstance assemble_br_miqp(const ModelMinlp& model, const Dataset& ds, int best,
                              double J_bar, HessianMode mode);

/// Variables are laid out as (x, y, eta) with eta last.
MiqpInstance assemble_lb_milp(const ModelMinlp& model, const Dataset& ds, int best);

} // namespace sbmiqp

#endif // SBMIQP_DRIVER_HPP
