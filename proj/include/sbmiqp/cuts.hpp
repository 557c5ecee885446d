#ifndef SBMIQP_CUTS_HPP
#define SBMIQP_CUTS_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace sbmiqp {

/// Linear row a^T y <= b over the integer variables.
struct CutRow {
    Eigen::VectorXd a;
    double b = 0.0;
};

/// One evaluated integer point. Feasible records carry the value J and the
/// Benders subgradient; infeasible records carry the projection y_bar and
/// the projection distance J_f.
struct EvalRecord {
    Eigen::VectorXd y;         // the proposed point (y_hat for infeasible ones)
    bool feasible = false;
    double J = 0.0;            // J(y) if feasible, J_f otherwise
    Eigen::VectorXd x;         // continuous minimizer / projection x part
    Eigen::VectorXd grad;      // raw subgradient (feasible only)
    Eigen::VectorXd grad_eff;  // after correction and amplification
    bool corrected = false;
    Eigen::VectorXd y_bar;     // projection (infeasible only)
    double sigma = 0.0;        // infeasibility-cut offset (infeasible only)
};

/// Safeguard statistics for one re-application.
struct SafeguardStats {
    int corrections = 0;
    int positive_sigmas = 0;
};

/// The dataset D_k of evaluated points, split into feasible (T) and
/// infeasible (S) index sets by the `feasible` flag.
class Dataset {
public:
    /// Throws DuplicateIterate when y was already recorded.
    int record_feasible(const Eigen::VectorXd& y, double J, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& grad);
    int record_infeasible(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_bar,
                          double J_f, const Eigen::VectorXd& x);

    bool contains(const Eigen::VectorXd& y) const;

    /// argmin J over feasible records; if none, argmin J_f over infeasible
    /// records (smallest index on ties); -1 when empty.
    int best_index() const;
    bool has_feasible() const { return n_feasible_ > 0; }

    int size() const { return static_cast<int>(records_.size()); }
    const EvalRecord& operator[](int i) const { return records_[i]; }
    const std::vector<EvalRecord>& records() const { return records_; }

    /// Recomputes every effective gradient and every sigma against the
    /// current best record. With enabled == false, raw gradients are used and
    /// all sigmas are zero. W must be symmetric positive definite; throws
    /// InvalidRho for rho < 1.
    SafeguardStats apply_safeguards(int best, const Eigen::MatrixXd& W, double rho,
                                    bool enabled);

private:
    std::vector<EvalRecord> records_;
    int n_feasible_ = 0;
};

/// Secant-consistent gradient correction: returns grad when the Benders cut
/// at (y_i, J_i, grad) does not overestimate J at y_best, otherwise the
/// minimal W-norm modification that makes the cut exact at y_best.
Eigen::VectorXd correct_gradient(double J_i, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& y_i, double J_best,
                                 const Eigen::VectorXd& y_best, const Eigen::MatrixXd& W,
                                 bool* corrected = nullptr);

/// rho * g with rho >= 1 (throws InvalidRho otherwise).
Eigen::VectorXd amplify(const Eigen::VectorXd& g, double rho);

/// Offset pushing the infeasibility cut past the best point:
/// max(0, (y_hat - y_bar)^T (y_best - y_bar)).
double infeasibility_sigma(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_bar,
                           const Eigen::VectorXd& y_best);

/// J_bar = alpha * J_best + (1 - alpha) * LB; throws InvalidAlpha unless
/// alpha is in (0, 1].
double reduced_rhs(double J_best, double lb, double alpha);

/// Benders-region row of a feasible record: J_i + g_eff^T (y - y_i) <= J_bar.
CutRow region_row(const EvalRecord& rec, double J_bar);

/// Infeasibility cut of an infeasible record:
/// (y_hat - y_bar)^T (y - y_bar) - sigma <= 0.
CutRow infeasibility_row(const EvalRecord& rec);

/// Epigraph row over (y, eta): eta >= J_i + g_eff^T (y - y_i), encoded as
/// a^T y - eta <= b.
struct EpigraphRow {
    Eigen::VectorXd a;
    double b = 0.0;
};
EpigraphRow epigraph_row(const EvalRecord& rec);

} // namespace sbmiqp

#endif // SBMIQP_CUTS_HPP
