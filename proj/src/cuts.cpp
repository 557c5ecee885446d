#include "sbmiqp/cuts.hpp"

#include <cmath>
#include <stdexcept>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

namespace {

bool same_point(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && (a - b).lpNorm<Eigen::Infinity>() < 1e-6;
}

} // namespace

int Dataset::record_feasible(const Eigen::VectorXd& y, double J, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& grad) {
    if (contains(y)) throw DuplicateIterate("point already in dataset");
    EvalRecord r;
    r.y = y;
    r.feasible = true;
    r.J = J;
    r.x = x;
    r.grad = grad;
    r.grad_eff = grad;
    records_.push_back(std::move(r));
    ++n_feasible_;
    return size() - 1;
}

int Dataset::record_infeasible(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_bar,
                               double J_f, const Eigen::VectorXd& x) {
    if (contains(y_hat)) throw DuplicateIterate("point already in dataset");
    EvalRecord r;
    r.y = y_hat;
    r.feasible = false;
    r.J = J_f;
    r.x = x;
    r.y_bar = y_bar;
    records_.push_back(std::move(r));
    return size() - 1;
}

bool Dataset::contains(const Eigen::VectorXd& y) const {
    for (const auto& r : records_)
        if (same_point(r.y, y)) return true;
    return false;
}

int Dataset::best_index() const {
    int best = -1;
    for (int i = 0; i < size(); ++i) {
        if (records_[i].feasible != (n_feasible_ > 0)) continue;
        if (best < 0 || records_[i].J < records_[best].J) best = i;
    }
    return best;
}

SafeguardStats Dataset::apply_safeguards(int best, const Eigen::MatrixXd& W, double rho,
                                         bool enabled) {
    if (rho < 1.0) throw InvalidRho("amplification factor must be >= 1");
    if (best < 0 || best >= size()) throw std::out_of_range("best index out of range");
    SafeguardStats stats;
    const EvalRecord& b = records_[best];
    const bool best_feasible = b.feasible;
    for (int i = 0; i < size(); ++i) {
        EvalRecord& r = records_[i];
        if (r.feasible) {
            r.corrected = false;
            r.grad_eff = r.grad;
            if (enabled && best_feasible && i != best) {
                bool corrected = false;
                Eigen::VectorXd g = correct_gradient(r.J, r.grad, r.y, b.J, b.y, W, &corrected);
                if (corrected) {
                    r.grad_eff = amplify(g, rho);
                    r.corrected = true;
                    ++stats.corrections;
                }
            }
        } else {
            r.sigma = 0.0;
            if (enabled && best_feasible) {
                r.sigma = infeasibility_sigma(r.y, r.y_bar, b.y);
                if (r.sigma > 0.0) ++stats.positive_sigmas;
            }
        }
    }
    return stats;
}

Eigen::VectorXd correct_gradient(double J_i, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& y_i, double J_best,
                                 const Eigen::VectorXd& y_best, const Eigen::MatrixXd& W,
                                 bool* corrected) {
    const Eigen::VectorXd dy = y_best - y_i;
    const double r = J_best - J_i - grad.dot(dy);
    if (corrected) *corrected = false;
    if (r >= 0.0) return grad;
    const Eigen::VectorXd Winv_dy = W.ldlt().solve(dy);
    const double denom = dy.dot(Winv_dy);
    if (denom <= 0.0) throw std::invalid_argument("W must be positive definite");
    if (corrected) *corrected = true;
    return grad + (r / denom) * Winv_dy;
}

Eigen::VectorXd amplify(const Eigen::VectorXd& g, double rho) {
    if (rho < 1.0) throw InvalidRho("amplification factor must be >= 1");
    return rho * g;
}

double infeasibility_sigma(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_bar,
                           const Eigen::VectorXd& y_best) {
    return std::max(0.0, (y_hat - y_bar).dot(y_best - y_bar));
}

double reduced_rhs(double J_best, double lb, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidAlpha("alpha must be in (0, 1]");
    return alpha * J_best + (1.0 - alpha) * lb;
}

CutRow region_row(const EvalRecord& rec, double J_bar) {
    CutRow row;
    row.a = rec.grad_eff;
    row.b = J_bar - rec.J + rec.grad_eff.dot(rec.y);
    return row;
}

CutRow infeasibility_row(const EvalRecord& rec) {
    CutRow row;
    row.a = rec.y - rec.y_bar;
    row.b = rec.sigma + row.a.dot(rec.y_bar);
    return row;
}

EpigraphRow epigraph_row(const EvalRecord& rec) {
    EpigraphRow row;
    row.a = rec.grad_eff;
    row.b = rec.grad_eff.dot(rec.y) - rec.J;
    return row;
}

} // namespace sbmiqp
