#ifndef SBMIQP_MODEL_HPP
#define SBMIQP_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sbmiqp/expr.hpp"

namespace sbmiqp {

/// Sparse-ish linear row a^T v <= rhs (or == rhs) over one variable block.
struct LinearRow {
    Eigen::VectorXd coeffs;
    double rhs = 0.0;
    bool equality = false;
};

/// Least-squares objective split f = 1/2 ||f1||^2 + f2.
struct ObjectiveSplit {
    std::vector<Expr> f1;
    Expr f2;
};

/// A MINLP instance: continuous variables x (indices [0, nx)), integer
/// variables y (indices [nx, nx+ny)), expressions over the joint vector.
struct ModelMinlp {
    int nx = 0;
    int ny = 0;
    Expr objective;
    std::vector<Expr> ineq;  // g(x, y) <= 0
    std::vector<Expr> eq;    // h(x, y) == 0
    Eigen::VectorXd x_lo, x_hi;
    Eigen::VectorXd y_lo, y_hi;              // finite (the integer set is bounded)
    std::vector<LinearRow> x_rows;           // rows of the polyhedral set X (over x only)
    std::vector<LinearRow> y_rows;           // rows of the polyhedral set over y only
    std::optional<ObjectiveSplit> split;
    bool declared_convex = false;
    std::vector<std::string> x_names, y_names;

    int n_g() const { return static_cast<int>(ineq.size()); }
    int n_h() const { return static_cast<int>(eq.size()); }
    int n_vars() const { return nx + ny; }

    /// Throws std::invalid_argument on dimension mismatches or unbounded
    /// integer variables.
    void validate() const;

    bool y_in_bounds(const Eigen::VectorXd& y) const;
};

struct EvalResult {
    double f = 0.0;
    Eigen::VectorXd g;
    Eigen::VectorXd h;
};

EvalResult evaluate(const ModelMinlp& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Compiled first/second derivative oracle over the joint variable vector.
/// Immutable after construction; evaluation uses per-call workspaces.
class DerivativeOracle {
public:
    explicit DerivativeOracle(const ModelMinlp& model);

    double f(const Eigen::VectorXd& z) const;
    Eigen::VectorXd grad_f(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd hess_f(const Eigen::VectorXd& z) const;
    Eigen::VectorXd g(const Eigen::VectorXd& z) const;
    Eigen::VectorXd h(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd jac_g(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd jac_h(const Eigen::VectorXd& z) const;

    int n() const { return n_; }

private:
    int n_;
    Tape f_tape_, g_tape_, h_tape_;
};

struct LinearizedData {
    Eigen::VectorXd z;  // expansion point (x, y)
    double f0 = 0.0;
    Eigen::VectorXd g0, h0;
    Eigen::VectorXd grad_f;
    Eigen::MatrixXd jac_g, jac_h;
    Eigen::MatrixXd B;  // symmetric PSD Hessian approximation

    double f_lin(const Eigen::VectorXd& zq) const { return f0 + grad_f.dot(zq - z); }
    Eigen::VectorXd g_lin(const Eigen::VectorXd& zq) const { return g0 + jac_g * (zq - z); }
    Eigen::VectorXd h_lin(const Eigen::VectorXd& zq) const { return h0 + jac_h * (zq - z); }
};

/// First-order expansion of f, g, h at (xbar, ybar) carrying a caller-supplied
/// Hessian approximation B (checked for symmetry and an eigenvalue floor).
LinearizedData linearize(const DerivativeOracle& oracle, const Eigen::VectorXd& xbar,
                         const Eigen::VectorXd& ybar, const Eigen::MatrixXd& B);

/// B = grad f1 * grad f1^T for the declared split form. Throws NotLeastSquares
/// when the model has no split.
Eigen::MatrixXd gauss_newton_hessian(const ModelMinlp& model, const Eigen::VectorXd& xbar,
                                     const Eigen::VectorXd& ybar);

/// Continuous NLP: minimize objective over z in [lo, hi] subject to
/// ineq(z) <= 0 and eq(z) = 0. Linear rows are folded into the expressions.
struct NlpProblem {
    int n = 0;
    Expr objective;
    std::vector<Expr> ineq;
    std::vector<Expr> eq;
    Eigen::VectorXd lo, hi;
};

/// NLP in x whose optimum is J(y_fix). Throws OutOfBounds when y_fix violates
/// the integer box or is non-integral.
NlpProblem fix_integers(const ModelMinlp& model, const Eigen::VectorXd& y_fix);

/// Continuous relaxation over (x, y) with integrality dropped.
NlpProblem relax_integrality(const ModelMinlp& model);

/// Affine expression helper: c + a^T v over variables [0, n).
Expr affine(const Eigen::VectorXd& a, double c);

} // namespace sbmiqp

#endif // SBMIQP_MODEL_HPP
