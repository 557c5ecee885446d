#include "sbmiqp/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

void ModelMinlp::validate() const {
    if (nx < 0 || ny < 0) throw std::invalid_argument("negative variable counts");
    if (x_lo.size() != nx || x_hi.size() != nx) throw std::invalid_argument("x bound arrays must have size nx");
    if (y_lo.size() != ny || y_hi.size() != ny) throw std::invalid_argument("y bound arrays must have size ny");
    if (!objective.valid()) throw std::invalid_argument("missing objective");
    for (int i = 0; i < ny; ++i) {
        if (!std::isfinite(y_lo[i]) || !std::isfinite(y_hi[i]))
            throw std::invalid_argument("integer variable bounds must be finite");
        if (y_lo[i] > y_hi[i]) throw std::invalid_argument("empty integer bound interval");
    }
    for (const auto& r : x_rows)
        if (r.coeffs.size() != nx) throw std::invalid_argument("x-row dimension mismatch");
    for (const auto& r : y_rows)
        if (r.coeffs.size() != ny) throw std::invalid_argument("y-row dimension mismatch");
}

bool ModelMinlp::y_in_bounds(const Eigen::VectorXd& y) const {
    if (y.size() != ny) return false;
    for (int i = 0; i < ny; ++i) {
        if (y[i] < y_lo[i] - 1e-9 || y[i] > y_hi[i] + 1e-9) return false;
        if (std::abs(y[i] - std::round(y[i])) > 1e-9) return false;
    }
    return true;
}

EvalResult evaluate(const ModelMinlp& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != model.nx || y.size() != model.ny)
        throw std::invalid_argument("evaluate: dimension mismatch");
    Eigen::VectorXd z(model.n_vars());
    z << x, y;
    DerivativeOracle oracle(model);
    EvalResult out;
    out.f = oracle.f(z);
    out.g = oracle.g(z);
    out.h = oracle.h(z);
    return out;
}

DerivativeOracle::DerivativeOracle(const ModelMinlp& model)
    : n_(model.n_vars()),
      f_tape_({model.objective}, model.n_vars()),
      g_tape_(model.ineq, model.n_vars()),
      h_tape_(model.eq, model.n_vars()) {}

double DerivativeOracle::f(const Eigen::VectorXd& z) const { return f_tape_.values(z)[0]; }

Eigen::VectorXd DerivativeOracle::grad_f(const Eigen::VectorXd& z) const {
    return f_tape_.grad_weighted(z, Eigen::VectorXd::Ones(1));
}

Eigen::MatrixXd DerivativeOracle::hess_f(const Eigen::VectorXd& z) const {
    return f_tape_.hessian_weighted(z, Eigen::VectorXd::Ones(1));
}

Eigen::VectorXd DerivativeOracle::g(const Eigen::VectorXd& z) const { return g_tape_.values(z); }
Eigen::VectorXd DerivativeOracle::h(const Eigen::VectorXd& z) const { return h_tape_.values(z); }
Eigen::MatrixXd DerivativeOracle::jac_g(const Eigen::VectorXd& z) const { return g_tape_.jacobian(z); }
Eigen::MatrixXd DerivativeOracle::jac_h(const Eigen::VectorXd& z) const { return h_tape_.jacobian(z); }

LinearizedData linearize(const DerivativeOracle& oracle, const Eigen::VectorXd& xbar,
                         const Eigen::VectorXd& ybar, const Eigen::MatrixXd& B) {
    Eigen::VectorXd z(xbar.size() + ybar.size());
    z << xbar, ybar;
    if (B.rows() != z.size() || B.cols() != z.size())
        throw std::invalid_argument("linearize: Hessian dimension mismatch");
    const double bnorm = B.norm();
    if ((B - B.transpose()).norm() > 1e-10 * std::max(1.0, bnorm))
        throw std::invalid_argument("linearize: Hessian not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, bnorm))
        throw std::invalid_argument("linearize: Hessian not positive semidefinite");

    LinearizedData lin;
    lin.z = z;
    lin.f0 = oracle.f(z);
    lin.grad_f = oracle.grad_f(z);
    lin.g0 = oracle.g(z);
    lin.h0 = oracle.h(z);
    lin.jac_g = oracle.jac_g(z);
    lin.jac_h = oracle.jac_h(z);
    lin.B = B;
    return lin;
}

Eigen::MatrixXd gauss_newton_hessian(const ModelMinlp& model, const Eigen::VectorXd& xbar,
                                     const Eigen::VectorXd& ybar) {
    if (!model.split) throw NotLeastSquares("model objective declares no least-squares split");
    Eigen::VectorXd z(model.n_vars());
    z << xbar, ybar;
    Tape f1_tape(model.split->f1, model.n_vars());
    const Eigen::MatrixXd jac = f1_tape.jacobian(z);  // n1 x n
    return jac.transpose() * jac;
}

Expr affine(const Eigen::VectorXd& a, double c) {
    Expr e = Expr::constant(c);
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] != 0.0) e = e + a[i] * Expr::variable(i);
    }
    return e;
}

namespace {

/// Appends the model's linear x/y rows as expressions over a target variable
/// layout given by block offsets (-1 offset = block dropped from problem).
void append_rows(const std::vector<LinearRow>& rows, int offset, int block_size,
                 std::vector<Expr>& ineq, std::vector<Expr>& eq) {
    for (const auto& r : rows) {
        Expr e = Expr::constant(-r.rhs);
        for (int i = 0; i < block_size; ++i) {
            if (r.coeffs[i] != 0.0) e = e + r.coeffs[i] * Expr::variable(offset + i);
        }
        (r.equality ? eq : ineq).push_back(e);
    }
}

/// Same, but with the block substituted by constants.
void append_rows_fixed(const std::vector<LinearRow>& rows, const Eigen::VectorXd& vals,
                       std::vector<Expr>& ineq, std::vector<Expr>& eq) {
    for (const auto& r : rows) {
        const double v = r.coeffs.dot(vals) - r.rhs;
        (r.equality ? eq : ineq).push_back(Expr::constant(v));
    }
}

} // namespace

NlpProblem fix_integers(const ModelMinlp& model, const Eigen::VectorXd& y_fix) {
    if (!model.y_in_bounds(y_fix)) throw OutOfBounds("fix_integers: point outside the integer set");
    const int n = model.n_vars();
    std::vector<double> fixed(n, 0.0);
    std::vector<int> remap(n, -1);
    std::vector<bool> is_fixed(n, false);
    for (int i = 0; i < model.nx; ++i) remap[i] = i;
    for (int j = 0; j < model.ny; ++j) {
        is_fixed[model.nx + j] = true;
        fixed[model.nx + j] = y_fix[j];
    }

    NlpProblem nlp;
    nlp.n = model.nx;
    nlp.objective = substitute(model.objective, fixed, remap, is_fixed);
    for (const Expr& e : model.ineq) nlp.ineq.push_back(substitute(e, fixed, remap, is_fixed));
    for (const Expr& e : model.eq) nlp.eq.push_back(substitute(e, fixed, remap, is_fixed));
    nlp.lo = model.x_lo;
    nlp.hi = model.x_hi;
    append_rows(model.x_rows, 0, model.nx, nlp.ineq, nlp.eq);
    append_rows_fixed(model.y_rows, y_fix, nlp.ineq, nlp.eq);
    return nlp;
}

NlpProblem relax_integrality(const ModelMinlp& model) {
    NlpProblem nlp;
    nlp.n = model.n_vars();
    nlp.objective = model.objective;
    nlp.ineq = model.ineq;
    nlp.eq = model.eq;
    nlp.lo.resize(nlp.n);
    nlp.hi.resize(nlp.n);
    nlp.lo << model.x_lo, model.y_lo;
    nlp.hi << model.x_hi, model.y_hi;
    append_rows(model.x_rows, 0, model.nx, nlp.ineq, nlp.eq);
    append_rows(model.y_rows, model.nx, model.ny, nlp.ineq, nlp.eq);
    return nlp;
}

} // namespace sbmiqp
