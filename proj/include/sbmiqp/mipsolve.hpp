#ifndef SBMIQP_MIPSOLVE_HPP
#define SBMIQP_MIPSOLVE_HPP

#include <Eigen/Dense>
#include <vector>

namespace sbmiqp {

/// Convex QP: minimize 1/2 z^T Q z + c^T z + c0
/// subject to A_in z <= b_in, A_eq z = b_eq, lo <= z <= hi.
struct QpProblem {
    Eigen::MatrixXd Q;  // symmetric PSD; empty or zero for an LP
    Eigen::VectorXd c;
    double c0 = 0.0;
    Eigen::MatrixXd A_in;
    Eigen::VectorXd b_in;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lo, hi;

    int n() const { return static_cast<int>(c.size()); }
    void validate() const;
};

enum class QpStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct QpSolution {
    QpStatus status = QpStatus::MaxIter;
    Eigen::VectorXd z;
    double value = 0.0;
    int iterations = 0;
};

/// Dense predictor-corrector interior point method with row scaling and an
/// elastic-LP fallback for infeasibility detection.
QpSolution solve_qp(const QpProblem& qp);

/// Clips tiny negative eigenvalues (> -1e-8 * ||Q||) to zero; throws
/// std::invalid_argument for genuinely indefinite matrices.
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& Q);

/// Index of the integer variable whose fractional part is closest to 1/2
/// (lowest index on ties), or -1 when all integer variables are integral
/// within tol_int.
int pick_branch_variable(const Eigen::VectorXd& z, const std::vector<bool>& is_int,
                         double tol_int);

struct MiqpInstance {
    QpProblem qp;
    std::vector<bool> is_int;  // size n
};

struct MipOptions {
    double gap = 1e-4;        // relative optimality gap target
    double tol_int = 1e-6;
    double time_limit = 0.0;  // seconds; 0 = none
    int pool_size = 1;
    long max_nodes = 2'000'000;
};

enum class MipStatus { Optimal, FeasibleGap, Infeasible, NoSolution };

struct PoolEntry {
    Eigen::VectorXd z;
    double value = 0.0;
};

struct MipSolution {
    MipStatus status = MipStatus::NoSolution;
    Eigen::VectorXd z;
    double value = 0.0;
    double bound = 0.0;  // proven lower bound
    double gap = 0.0;
    std::vector<PoolEntry> pool;  // best distinct integer assignments, ascending value
    long nodes = 0;
};

/// Best-bound branch and bound (node sequence breaks ties) with
/// most-fractional branching.
MipSolution solve_mip(const MiqpInstance& inst, const MipOptions& opts = MipOptions());

} // namespace sbmiqp

#endif // SBMIQP_MIPSOLVE_HPP
