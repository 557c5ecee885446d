#ifndef SBMIQP_EXPR_HPP
#define SBMIQP_EXPR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <vector>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

enum class ExprOp {
    Constant,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,   // general a^b, requires a > 0
    PowC,  // a^c with constant exponent c
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Min,  // piecewise, subdifferentiable at ties
    Max
};

/// Immutable expression DAG node handle. Cheap to copy, structurally shared.
class Expr {
public:
    struct Node;

    Expr() = default;

    static Expr constant(double v);
    static Expr variable(int index);

    bool valid() const { return node_ != nullptr; }
    const Node& node() const;
    const Node* raw() const;

    bool is_constant() const;
    double constant_value() const;

    static Expr make(ExprOp op, Expr a, Expr b = Expr(), double value = 0.0);

private:
    std::shared_ptr<const Node> node_;
};

struct Expr::Node {
    ExprOp op = ExprOp::Constant;
    double value = 0.0;  // Constant payload or PowC exponent
    int var = -1;
    Expr a, b;
};

inline const Expr::Node& Expr::node() const { return *node_; }
inline const Expr::Node* Expr::raw() const { return node_.get(); }
inline bool Expr::is_constant() const { return node_ && node_->op == ExprOp::Constant; }
inline double Expr::constant_value() const { return node_->value; }

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, double b);
Expr operator+(double a, const Expr& b);
Expr operator-(const Expr& a, double b);
Expr operator-(double a, const Expr& b);
Expr operator*(const Expr& a, double b);
Expr operator*(double a, const Expr& b);
Expr operator/(const Expr& a, double b);
Expr operator/(double a, const Expr& b);

Expr pow(const Expr& a, const Expr& b);
Expr pow(const Expr& a, double c);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sqrt(const Expr& a);
Expr min(const Expr& a, const Expr& b);
Expr max(const Expr& a, const Expr& b);
Expr square(const Expr& a);

/// Rebuilds an expression with selected variables replaced by constants and
/// the remaining variable indices remapped (remap[i] < 0 means "must be fixed").
Expr substitute(const Expr& e, const std::vector<double>& fixed_values,
                const std::vector<int>& remap, const std::vector<bool>& is_fixed);

/// First-order dual number for forward-over-reverse second derivatives.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, double dot) : v(value), d(dot) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    const double q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline Dual exp(Dual a) { const double e = std::exp(a.v); return {e, e * a.d}; }
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual sqrt(Dual a) { const double s = std::sqrt(a.v); return {s, s > 0 ? a.d / (2 * s) : 0.0}; }
inline Dual pow(Dual a, double c) {
    const double p = std::pow(a.v, c);
    const double dp = (a.v == 0.0 && c > 1.0) ? 0.0 : c * std::pow(a.v, c - 1.0);
    return {p, dp * a.d};
}
inline Dual pow(Dual a, Dual b) {
    const double p = std::pow(a.v, b.v);
    return {p, p * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}

inline double scalar_value(double x) { return x; }
inline double scalar_value(const Dual& x) { return x.v; }

/// A vector-valued expression compiled into a flat instruction list over a
/// shared value workspace. Forward evaluation and reverse-mode adjoints are
/// templated on the scalar so that second derivatives come from running the
/// same sweeps with dual numbers.
class Tape {
public:
    struct Instr {
        ExprOp op;
        int a = -1, b = -1;  // operand slots
        int var = -1;
        double value = 0.0;
    };

    Tape() = default;
    Tape(const std::vector<Expr>& outputs, int n_vars);

    int n_vars() const { return n_vars_; }
    int n_outputs() const { return static_cast<int>(out_slots_.size()); }
    int n_slots() const { return static_cast<int>(code_.size()); }

    template <class Scalar>
    void forward(const Scalar* x, std::vector<Scalar>& work) const {
        using std::cos;
        using std::exp;
        using std::log;
        using std::pow;
        using std::sin;
        using std::sqrt;
        work.resize(code_.size());
        for (std::size_t i = 0; i < code_.size(); ++i) {
            const Instr& in = code_[i];
            Scalar& w = work[i];
            switch (in.op) {
                case ExprOp::Constant: w = Scalar(in.value); break;
                case ExprOp::Var: w = x[in.var]; break;
                case ExprOp::Add: w = work[in.a] + work[in.b]; break;
                case ExprOp::Sub: w = work[in.a] - work[in.b]; break;
                case ExprOp::Mul: w = work[in.a] * work[in.b]; break;
                case ExprOp::Div:
                    if (scalar_value(work[in.b]) == 0.0) throw DomainError("division by zero");
                    w = work[in.a] / work[in.b];
                    break;
                case ExprOp::Neg: w = -work[in.a]; break;
                case ExprOp::Pow:
                    if (scalar_value(work[in.a]) <= 0.0) throw DomainError("pow with nonpositive base");
                    w = pow(work[in.a], work[in.b]);
                    break;
                case ExprOp::PowC: {
                    const double base = scalar_value(work[in.a]);
                    const bool integral = in.value == std::floor(in.value);
                    if (!integral && base < 0.0) throw DomainError("fractional power of negative value");
                    if (base == 0.0 && in.value < 0.0) throw DomainError("zero raised to negative power");
                    w = pow(work[in.a], in.value);
                    break;
                }
                case ExprOp::Exp: w = exp(work[in.a]); break;
                case ExprOp::Log:
                    if (scalar_value(work[in.a]) <= 0.0) throw DomainError("log of nonpositive value");
                    w = log(work[in.a]);
                    break;
                case ExprOp::Sin: w = sin(work[in.a]); break;
                case ExprOp::Cos: w = cos(work[in.a]); break;
                case ExprOp::Sqrt:
                    if (scalar_value(work[in.a]) < 0.0) throw DomainError("sqrt of negative value");
                    w = sqrt(work[in.a]);
                    break;
                case ExprOp::Min: w = (work[in.a] <= work[in.b]) ? work[in.a] : work[in.b]; break;
                case ExprOp::Max: w = (work[in.a] <= work[in.b]) ? work[in.b] : work[in.a]; break;
            }
        }
    }

    template <class Scalar>
    Scalar output(const std::vector<Scalar>& work, int i) const {
        return work[out_slots_[i]];
    }

    /// Reverse sweep accumulating d(sum_i seed_i * out_i)/dx into grad (length n_vars).
    template <class Scalar>
    void reverse(const std::vector<Scalar>& work, const Scalar* seed, Scalar* grad) const {
        using std::cos;
        using std::log;
        using std::pow;
        using std::sin;
        std::vector<Scalar> adj(code_.size(), Scalar(0.0));
        for (int i = 0; i < n_outputs(); ++i) adj[out_slots_[i]] += seed[i];
        for (int v = 0; v < n_vars_; ++v) grad[v] = Scalar(0.0);
        for (int i = static_cast<int>(code_.size()) - 1; i >= 0; --i) {
            const Instr& in = code_[i];
            const Scalar& g = adj[i];
            switch (in.op) {
                case ExprOp::Constant: break;
                case ExprOp::Var: grad[in.var] += g; break;
                case ExprOp::Add: adj[in.a] += g; adj[in.b] += g; break;
                case ExprOp::Sub: adj[in.a] += g; adj[in.b] += -g; break;
                case ExprOp::Mul:
                    adj[in.a] += g * work[in.b];
                    adj[in.b] += g * work[in.a];
                    break;
                case ExprOp::Div: {
                    const Scalar inv_b = Scalar(1.0) / work[in.b];
                    adj[in.a] += g * inv_b;
                    adj[in.b] += -g * work[i] * inv_b;
                    break;
                }
                case ExprOp::Neg: adj[in.a] += -g; break;
                case ExprOp::Pow:
                    adj[in.a] += g * work[in.b] * work[i] / work[in.a];
                    adj[in.b] += g * work[i] * log(work[in.a]);
                    break;
                case ExprOp::PowC:
                    if (in.value != 0.0) {
                        const double c = in.value;
                        // only fractional exponents need the zero-base guard:
                        // their higher derivatives blow up at zero, while for
                        // integral c the chain rule stays finite (and dropping
                        // the term would lose second-order information)
                        if (scalar_value(work[in.a]) == 0.0 && c > 1.0 &&
                            c != std::floor(c)) {
                            // derivative c * a^{c-1} vanishes
                        } else {
                            adj[in.a] += g * Scalar(c) * pow(work[in.a], c - 1.0);
                        }
                    }
                    break;
                case ExprOp::Exp: adj[in.a] += g * work[i]; break;
                case ExprOp::Log: adj[in.a] += g / work[in.a]; break;
                case ExprOp::Sin: adj[in.a] += g * cos(work[in.a]); break;
                case ExprOp::Cos: adj[in.a] += -g * sin(work[in.a]); break;
                case ExprOp::Sqrt: adj[in.a] += g / (Scalar(2.0) * work[i]); break;
                case ExprOp::Min:
                    if (work[in.a] <= work[in.b]) adj[in.a] += g; else adj[in.b] += g;
                    break;
                case ExprOp::Max:
                    if (work[in.a] <= work[in.b]) adj[in.b] += g; else adj[in.a] += g;
                    break;
            }
        }
    }

    Eigen::VectorXd values(const Eigen::VectorXd& x) const;
    /// Gradient of seed^T outputs at x.
    Eigen::VectorXd grad_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const;
    /// Dense Jacobian, n_outputs x n_vars (one reverse sweep per row).
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
    /// Hessian of seed^T outputs at x, via dual-number directional sweeps.
    Eigen::MatrixXd hessian_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const;

private:
    std::vector<Instr> code_;
    std::vector<int> out_slots_;
    int n_vars_ = 0;
};

} // namespace sbmiqp

#endif // SBMIQP_EXPR_HPP
