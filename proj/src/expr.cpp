#include "sbmiqp/expr.hpp"

#include <functional>

namespace sbmiqp {

Expr Expr::make(ExprOp op, Expr a, Expr b, double value) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = value;
    Expr e;
    e.node_ = std::move(n);
    return e;
}

Expr Expr::constant(double v) { return make(ExprOp::Constant, Expr(), Expr(), v); }

Expr Expr::variable(int index) {
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Var;
    n->var = index;
    Expr e;
    e.node_ = std::move(n);
    return e;
}

namespace {
bool both_const(const Expr& a, const Expr& b) { return a.is_constant() && b.is_constant(); }
bool is_zero(const Expr& e) { return e.is_constant() && e.constant_value() == 0.0; }
bool is_one(const Expr& e) { return e.is_constant() && e.constant_value() == 1.0; }
} // namespace

Expr operator+(const Expr& a, const Expr& b) {
    if (both_const(a, b)) return Expr::constant(a.constant_value() + b.constant_value());
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return Expr::make(ExprOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (both_const(a, b)) return Expr::constant(a.constant_value() - b.constant_value());
    if (is_zero(b)) return a;
    if (is_zero(a)) return -b;
    return Expr::make(ExprOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (both_const(a, b)) return Expr::constant(a.constant_value() * b.constant_value());
    if (is_zero(a) || is_zero(b)) return Expr::constant(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return Expr::make(ExprOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (both_const(a, b) && b.constant_value() != 0.0)
        return Expr::constant(a.constant_value() / b.constant_value());
    if (is_one(b)) return a;
    return Expr::make(ExprOp::Div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.constant_value());
    return Expr::make(ExprOp::Neg, a);
}

Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }

Expr pow(const Expr& a, const Expr& b) {
    if (b.is_constant()) return pow(a, b.constant_value());
    return Expr::make(ExprOp::Pow, a, b);
}

Expr pow(const Expr& a, double c) {
    if (a.is_constant()) return Expr::constant(std::pow(a.constant_value(), c));
    if (c == 0.0) return Expr::constant(1.0);
    if (c == 1.0) return a;
    return Expr::make(ExprOp::PowC, a, Expr(), c);
}

Expr exp(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::exp(a.constant_value()));
    return Expr::make(ExprOp::Exp, a);
}

Expr log(const Expr& a) {
    if (a.is_constant() && a.constant_value() > 0.0) return Expr::constant(std::log(a.constant_value()));
    return Expr::make(ExprOp::Log, a);
}

Expr sin(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::sin(a.constant_value()));
    return Expr::make(ExprOp::Sin, a);
}

Expr cos(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::cos(a.constant_value()));
    return Expr::make(ExprOp::Cos, a);
}

Expr sqrt(const Expr& a) {
    if (a.is_constant() && a.constant_value() >= 0.0) return Expr::constant(std::sqrt(a.constant_value()));
    return Expr::make(ExprOp::Sqrt, a);
}

Expr min(const Expr& a, const Expr& b) {
    if (both_const(a, b)) return Expr::constant(std::min(a.constant_value(), b.constant_value()));
    return Expr::make(ExprOp::Min, a, b);
}

Expr max(const Expr& a, const Expr& b) {
    if (both_const(a, b)) return Expr::constant(std::max(a.constant_value(), b.constant_value()));
    return Expr::make(ExprOp::Max, a, b);
}

Expr square(const Expr& a) { return pow(a, 2.0); }

Expr substitute(const Expr& e, const std::vector<double>& fixed_values,
                const std::vector<int>& remap, const std::vector<bool>& is_fixed) {
    std::unordered_map<const Expr::Node*, Expr> memo;
    std::function<Expr(const Expr&)> rec = [&](const Expr& cur) -> Expr {
        if (!cur.valid()) return cur;
        auto it = memo.find(cur.raw());
        if (it != memo.end()) return it->second;
        const Expr::Node& n = cur.node();
        Expr out;
        switch (n.op) {
            case ExprOp::Constant: out = cur; break;
            case ExprOp::Var:
                if (is_fixed[n.var]) {
                    out = Expr::constant(fixed_values[n.var]);
                } else {
                    out = Expr::variable(remap[n.var]);
                }
                break;
            case ExprOp::PowC: out = pow(rec(n.a), n.value); break;
            default: {
                Expr a = rec(n.a);
                Expr b = n.b.valid() ? rec(n.b) : Expr();
                switch (n.op) {
                    case ExprOp::Add: out = a + b; break;
                    case ExprOp::Sub: out = a - b; break;
                    case ExprOp::Mul: out = a * b; break;
                    case ExprOp::Div: out = a / b; break;
                    case ExprOp::Neg: out = -a; break;
                    case ExprOp::Pow: out = pow(a, b); break;
                    case ExprOp::Exp: out = exp(a); break;
                    case ExprOp::Log: out = log(a); break;
                    case ExprOp::Sin: out = sin(a); break;
                    case ExprOp::Cos: out = cos(a); break;
                    case ExprOp::Sqrt: out = sqrt(a); break;
                    case ExprOp::Min: out = min(a, b); break;
                    case ExprOp::Max: out = max(a, b); break;
                    default: out = cur; break;
                }
            }
        }
        memo.emplace(cur.raw(), out);
        return out;
    };
    return rec(e);
}

Tape::Tape(const std::vector<Expr>& outputs, int n_vars) : n_vars_(n_vars) {
    std::unordered_map<const Expr::Node*, int> slot;
    std::function<int(const Expr&)> emit = [&](const Expr& e) -> int {
        auto it = slot.find(e.raw());
        if (it != slot.end()) return it->second;
        const Expr::Node& n = e.node();
        Instr in;
        in.op = n.op;
        in.value = n.value;
        in.var = n.var;
        if (n.a.valid()) in.a = emit(n.a);
        if (n.b.valid()) in.b = emit(n.b);
        const int s = static_cast<int>(code_.size());
        code_.push_back(in);
        slot.emplace(e.raw(), s);
        return s;
    };
    out_slots_.reserve(outputs.size());
    for (const Expr& e : outputs) {
        out_slots_.push_back(e.valid() ? emit(e) : emit(Expr::constant(0.0)));
    }
}

Eigen::VectorXd Tape::values(const Eigen::VectorXd& x) const {
    std::vector<double> work;
    forward(x.data(), work);
    Eigen::VectorXd out(n_outputs());
    for (int i = 0; i < n_outputs(); ++i) out[i] = output(work, i);
    return out;
}

Eigen::VectorXd Tape::grad_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const {
    std::vector<double> work;
    forward(x.data(), work);
    Eigen::VectorXd grad(n_vars_);
    reverse(work, seed.data(), grad.data());
    return grad;
}

Eigen::MatrixXd Tape::jacobian(const Eigen::VectorXd& x) const {
    std::vector<double> work;
    forward(x.data(), work);
    Eigen::MatrixXd jac(n_outputs(), n_vars_);
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(n_outputs());
    Eigen::VectorXd row(n_vars_);
    for (int i = 0; i < n_outputs(); ++i) {
        seed[i] = 1.0;
        reverse(work, seed.data(), row.data());
        jac.row(i) = row.transpose();
        seed[i] = 0.0;
    }
    return jac;
}

Eigen::MatrixXd Tape::hessian_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const {
    Eigen::MatrixXd hess(n_vars_, n_vars_);
    std::vector<Dual> xd(n_vars_);
    for (int i = 0; i < n_vars_; ++i) xd[i] = Dual(x[i], 0.0);
    std::vector<Dual> seedd(n_outputs());
    for (int i = 0; i < n_outputs(); ++i) seedd[i] = Dual(seed[i], 0.0);
    std::vector<Dual> work;
    std::vector<Dual> grad(n_vars_);
    for (int j = 0; j < n_vars_; ++j) {
        xd[j].d = 1.0;
        forward(xd.data(), work);
        reverse(work, seedd.data(), grad.data());
        for (int i = 0; i < n_vars_; ++i) hess(i, j) = grad[i].d;
        xd[j].d = 0.0;
    }
    // symmetrize away roundoff
    hess = 0.5 * (hess + hess.transpose()).eval();
    return hess;
}

} // namespace sbmiqp
