#ifndef SBMIQP_TRACE_HPP
#define SBMIQP_TRACE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sbmiqp {

/// One outer iteration of the solver loop.
struct TraceIter {
    int k = 0;
    double lb = 0.0;
    double ub = 0.0;
    int best_index = -1;
    Eigen::VectorXd y;        // iterate evaluated at this iteration
    bool feasible = false;    // evaluation outcome
    double value = 0.0;       // J(y) or the projection distance J_f
    std::string master;       // "br-miqp", "lb-milp" or "none"
    double V = 0.0;           // master objective value (proposal for k+1)
    int corrections = 0;      // active gradient corrections after this iteration
    int positive_sigmas = 0;  // active infeasibility-cut offsets
    int extra_evals = 0;      // additional pool points evaluated
    double t_nlp = 0.0;       // seconds in NLP subproblems
    double t_mip = 0.0;       // seconds in master problems
};

struct Trace {
    int trace_version = 1;
    std::vector<TraceIter> iters;

    /// Serializes the trace plus the final result block to JSON.
    std::string to_json(const std::string& status, double objective, double lb,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

} // namespace sbmiqp

#endif // SBMIQP_TRACE_HPP
