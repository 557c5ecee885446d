#ifndef SBMIQP_BENCH_HPP
#define SBMIQP_BENCH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sbmiqp/model.hpp"

namespace sbmiqp {

/// Convex tutorial MINLP:
///   min (y1 - 4.1)^2 + (y2 - 4)^2 + 1000 x
///   s.t. y1^2 + y2^2 - 9 <= x,  x >= 0,  y in Z^2 ∩ [-10, 10]^2.
/// Carries the least-squares split f1 = (sqrt(2)(y1-4.1), sqrt(2)(y2-4)),
/// f2 = 1000 x.
ModelMinlp tutorial_problem();

/// Nonconvex 1-D integer problem: min (y^2 - 5)^2 + 4 y over y in Z ∩ [-4, 4],
/// with a dummy continuous variable pinned to 0 so the NLP stage is nontrivial.
ModelMinlp nonconvex_integer_problem();

/// Switched-system optimal control benchmark over the unstable scalar dynamics
/// xdot = x^3 - u with binary controls and a minimum-uptime (dwell) rule.
struct OcpSpec {
    int N = 30;           // control intervals
    double ts = 0.05;     // sample time of the one-step RK4 integrator
    double x_init = 0.9;  // fixed initial state
    double x_ref = 0.7;   // tracking reference
};

/// Direct multiple-shooting transcription: continuous states x_0..x_N,
/// binary controls u_0..u_{N-1}, equalities x_0 = x_init and
/// x_{k+1} = F_RK4(x_k, u_k), cost sum_{k=0}^{N} (x_k - x_ref)^2, and dwell
/// rows u_k >= u_{k-1} - u_{k-2} (u with negative index taken as 0).
ModelMinlp unstable_ocp(const OcpSpec& spec);

/// One numeric RK4 step of xdot = x^3 - u.
double ocp_rk4_step(const OcpSpec& spec, double x, double u);

/// Cost of simulating a fixed control sequence (length N); returns +inf when
/// the trajectory blows past |x| > 10 or the sequence violates the dwell rule.
double ocp_sequence_cost(const OcpSpec& spec, const std::vector<int>& u);

struct BruteForceResult {
    std::vector<int> u;
    double objective = 0.0;
    std::int64_t nodes = 0;  // DFS nodes visited
};

/// Exhaustive dwell-pruned depth-first search over all control sequences with
/// cost-dominance pruning. Exact global reference for unstable_ocp.
BruteForceResult brute_force_ocp(const OcpSpec& spec);

/// Normalized objective quality in [0, 1]-ish scale:
/// (V - m) / (V_min - m) with m = min(V_min - 1, 0).
double objective_ratio(double V, double V_min);

/// Seeded random convex MIQP-like MINLP: strictly convex quadratic objective,
/// one convex quadratic inequality (a ball certain to contain an integer
/// point), one affine equality over x when nx >= 2, box [-5, 5] on all
/// variables. Requires 1 <= ny <= 4.
ModelMinlp random_convex_minlp(unsigned seed, int nx, int ny);

/// Exhaustive enumeration oracle: solves the pinned NLP for every integer
/// assignment in the box and returns the best objective (+inf when none is
/// feasible). Intended for small integer boxes only.
double enumerate_minlp(const ModelMinlp& model, Eigen::VectorXd* best_y = nullptr);

} // namespace sbmiqp

#endif // SBMIQP_BENCH_HPP
