#ifndef SBMIQP_NLPSOLVE_HPP
#define SBMIQP_NLPSOLVE_HPP

#include <Eigen/Dense>
#include <optional>

#include "sbmiqp/model.hpp"

namespace sbmiqp {

enum class NlpStatus { Optimal, Infeasible, MaxIter, Unbounded, Breakdown };

struct NlpOptions {
    double tol_kkt = 1e-8;
    double tol_feas = 1e-6;
    double tol_infeas = 1e-6;
    double mu_final = 1e-9;
    int max_iter = 400;
    int elastic_max_iter = 200;
};

struct NlpSolution {
    NlpStatus status = NlpStatus::Breakdown;
    Eigen::VectorXd x;
    double objective = 0.0;
    Eigen::VectorXd lambda;  // multipliers of the problem's inequality rows, >= 0
    Eigen::VectorXd mu;      // multipliers of the equality rows
    double kkt_residual = 0.0;
    double constraint_violation = 0.0;
    int iterations = 0;
};

/// Primal-dual interior point method with slacked inequalities, an l1 merit
/// line search and regularized dense KKT solves. Box bounds are folded into
/// the inequality set internally; degenerate boxes (lo == hi) become
/// equalities.
NlpSolution solve_nlp(const NlpProblem& nlp, const Eigen::VectorXd& x0,
                      const NlpOptions& opts = NlpOptions());

/// Evaluation of J(y): the integer-pinned NLP plus the Benders subgradient
/// read off the pin multipliers.
struct JEval {
    Eigen::VectorXd y;
    bool feasible = false;
    double J = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x;
    Eigen::VectorXd subgrad;
};

JEval eval_J(const ModelMinlp& model, const Eigen::VectorXd& y_fix,
             const std::optional<Eigen::VectorXd>& x_warm = std::nullopt,
             const NlpOptions& opts = NlpOptions());

/// Projection of an infeasible integer point onto the relaxed feasible set,
/// optionally restricted to the ball around the best point. Throws
/// RestorationFailed when the relaxed feasible set is empty.
struct FeasibilityResult {
    Eigen::VectorXd y_bar;
    double J_f = 0.0;
    Eigen::VectorXd x;
};

FeasibilityResult solve_feasibility(const ModelMinlp& model, const Eigen::VectorXd& y_hat,
                                    const std::optional<Eigen::VectorXd>& y_best = std::nullopt,
                                    const NlpOptions& opts = NlpOptions());

struct RelaxationResult {
    double lb = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    bool heuristic_lb = false;  // local value only (model not declared convex)
    NlpStatus status = NlpStatus::Breakdown;
};

RelaxationResult solve_relaxation(const ModelMinlp& model, const NlpOptions& opts = NlpOptions());

/// Interior-ish default start: box midpoints, clamped for one-sided bounds.
Eigen::VectorXd box_midpoint(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

} // namespace sbmiqp

#endif // SBMIQP_NLPSOLVE_HPP
