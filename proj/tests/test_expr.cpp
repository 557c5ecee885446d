#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sbmiqp/errors.hpp"
#include "sbmiqp/expr.hpp"

using namespace sbmiqp;

namespace {

Eigen::VectorXd fd_gradient(const Tape& tape, const Eigen::VectorXd& x, int out, double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (tape.values(xp)[out] - tape.values(xm)[out]) / (2 * h);
    }
    return g;
}

Eigen::MatrixXd fd_hessian(const Tape& tape, const Eigen::VectorXd& x, const Eigen::VectorXd& seed,
                           double h = 1e-5) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd H(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        H.col(j) = (tape.grad_weighted(xp, seed) - tape.grad_weighted(xm, seed)) / (2 * h);
    }
    return 0.5 * (H + H.transpose());
}

/// Random expression whose value stays well inside every domain guard for
/// inputs in [0.5, 2].
Expr random_safe_expr(std::mt19937& rng, int n_vars, int depth) {
    std::uniform_int_distribution<int> pick_var(0, n_vars - 1);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    if (depth == 0) {
        if (rng() % 3 == 0) return Expr::constant(coef(rng));
        return Expr::variable(pick_var(rng));
    }
    Expr a = random_safe_expr(rng, n_vars, depth - 1);
    Expr b = random_safe_expr(rng, n_vars, depth - 1);
    switch (rng() % 12) {
        case 0: return a + b;
        case 1: return a - b;
        case 2: return a * b;
        case 3: return a / (3.0 + square(b));
        case 4: return sin(a);
        case 5: return cos(a) * b;
        case 6: return exp(0.3 * a);
        case 7: return log(1.5 + square(a));
        case 8: return sqrt(1.0 + square(a));
        case 9: return square(a) + b;
        case 10: return pow(1.5 + square(a), 1.5);
        default: return pow(a, 3.0);
    }
}

} // namespace

TEST_CASE("constant folding and simplification") {
    Expr two = Expr::constant(2.0);
    Expr three = Expr::constant(3.0);
    CHECK((two + three).is_constant());
    CHECK((two + three).constant_value() == doctest::Approx(5.0));
    CHECK((two * three).constant_value() == doctest::Approx(6.0));
    CHECK(pow(two, 3.0).constant_value() == doctest::Approx(8.0));

    Expr x = Expr::variable(0);
    CHECK((x + 0.0).raw() == x.raw());
    CHECK((x * 1.0).raw() == x.raw());
    CHECK((0.0 * x).is_constant());
    CHECK(pow(x, 1.0).raw() == x.raw());
}

TEST_CASE("tape values for a composite expression") {
    Expr x = Expr::variable(0), y = Expr::variable(1);
    Expr f = square(x - 4.1) + square(y - 4.0) + 1000.0 * x * y;
    Tape tape({f}, 2);
    Eigen::VectorXd z(2);
    z << 1.0, 2.0;
    const double expect = (1.0 - 4.1) * (1.0 - 4.1) + (2.0 - 4.0) * (2.0 - 4.0) + 2000.0;
    CHECK(tape.values(z)[0] == doctest::Approx(expect));
}

TEST_CASE("gradients of every primitive against central differences") {
    Expr x = Expr::variable(0), y = Expr::variable(1);
    std::vector<Expr> battery = {
        x + y,          x - y,          x * y,
        x / y,          -x,             pow(x, y),
        pow(x, 3.0),    pow(x, 2.5),    exp(x),
        log(x),         sin(x * y),     cos(x - y),
        sqrt(x + y),    min(x, 2.0 * y), max(x, 2.0 * y),
    };
    Tape tape(battery, 2);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.6, 1.9);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd z(2);
        z << unif(rng), unif(rng);
        const Eigen::MatrixXd jac = tape.jacobian(z);
        for (int i = 0; i < tape.n_outputs(); ++i) {
            const Eigen::VectorXd ref = fd_gradient(tape, z, i);
            CHECK((jac.row(i).transpose() - ref).lpNorm<Eigen::Infinity>() < 1e-5);
        }
    }
}

TEST_CASE("gradients and Hessians of random DAGs against central differences") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    const int n_vars = 3;
    for (int trial = 0; trial < 200; ++trial) {
        Expr e = random_safe_expr(rng, n_vars, 3);
        Tape tape({e}, n_vars);
        Eigen::VectorXd z(n_vars);
        for (int i = 0; i < n_vars; ++i) z[i] = unif(rng);
        const double val = tape.values(z)[0];
        if (!std::isfinite(val) || std::abs(val) > 1e6) continue;

        const Eigen::VectorXd g = tape.grad_weighted(z, Eigen::VectorXd::Ones(1));
        const Eigen::VectorXd g_ref = fd_gradient(tape, z, 0);
        const double gs = std::max(1.0, g_ref.lpNorm<Eigen::Infinity>());
        CHECK((g - g_ref).lpNorm<Eigen::Infinity>() / gs < 1e-5);

        const Eigen::MatrixXd H = tape.hessian_weighted(z, Eigen::VectorXd::Ones(1));
        const Eigen::MatrixXd H_ref = fd_hessian(tape, z, Eigen::VectorXd::Ones(1));
        const double hs = std::max(1.0, H_ref.lpNorm<Eigen::Infinity>());
        CHECK((H - H_ref).lpNorm<Eigen::Infinity>() / hs < 5e-4);
        CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() < 1e-12 * std::max(1.0, H.norm()));
    }
}

TEST_CASE("weighted Hessian of multiple outputs") {
    Expr x = Expr::variable(0), y = Expr::variable(1);
    Tape tape({square(x) * y, exp(x + y)}, 2);
    Eigen::VectorXd z(2);
    z << 0.3, -0.2;
    Eigen::VectorXd seed(2);
    seed << 2.0, -1.5;
    const Eigen::MatrixXd H = tape.hessian_weighted(z, seed);
    const Eigen::MatrixXd H_ref = fd_hessian(tape, z, seed);
    CHECK((H - H_ref).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("min/max subgradient picks the active branch") {
    Expr x = Expr::variable(0), y = Expr::variable(1);
    Tape tape({min(x, y), max(x, y)}, 2);
    Eigen::VectorXd z(2);
    z << 1.0, 2.0;
    const Eigen::MatrixXd jac = tape.jacobian(z);
    CHECK(jac(0, 0) == doctest::Approx(1.0));
    CHECK(jac(0, 1) == doctest::Approx(0.0));
    CHECK(jac(1, 0) == doctest::Approx(0.0));
    CHECK(jac(1, 1) == doctest::Approx(1.0));
    // at a tie both route to the first argument
    z << 1.5, 1.5;
    const Eigen::MatrixXd jt = tape.jacobian(z);
    CHECK(jt(0, 0) == doctest::Approx(1.0));
    CHECK(jt(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("domain guards throw DomainError") {
    Expr x = Expr::variable(0);
    Eigen::VectorXd z(1);
    z << -1.0;
    CHECK_THROWS_AS(Tape({log(x)}, 1).values(z), DomainError);
    CHECK_THROWS_AS(Tape({sqrt(x)}, 1).values(z), DomainError);
    CHECK_THROWS_AS(Tape({pow(x, 1.5)}, 1).values(z), DomainError);
    CHECK_THROWS_AS(Tape({pow(x, Expr::variable(0))}, 1).values(z), DomainError);
    z << 0.0;
    CHECK_THROWS_AS(Tape({1.0 / x}, 1).values(z), DomainError);
    CHECK_THROWS_AS(Tape({pow(x, -2.0)}, 1).values(z), DomainError);
    // integer powers of negative values are fine
    z << -2.0;
    CHECK(Tape({pow(x, 3.0)}, 1).values(z)[0] == doctest::Approx(-8.0));
}

TEST_CASE("substitute fixes variables and remaps the rest") {
    Expr x = Expr::variable(0), y = Expr::variable(1), w = Expr::variable(2);
    Expr e = square(x) + y * w + sin(y);
    // fix y = 3, keep x -> 0, w -> 1
    std::vector<double> fixed = {0.0, 3.0, 0.0};
    std::vector<int> remap = {0, -1, 1};
    std::vector<bool> is_fixed = {false, true, false};
    Expr sub = substitute(e, fixed, remap, is_fixed);
    Tape tape({sub}, 2);
    Eigen::VectorXd z(2);
    z << 2.0, 5.0;
    CHECK(tape.values(z)[0] == doctest::Approx(4.0 + 15.0 + std::sin(3.0)));
}

TEST_CASE("DAG sharing evaluates shared subexpressions once") {
    Expr x = Expr::variable(0);
    Expr s = square(x) + 1.0;
    Expr e = s * s + s;
    Tape tape({e}, 1);
    // slots: x, x^2, +1 const, x^2+1, s*s, s*s+s -> shared node emitted once
    CHECK(tape.n_slots() <= 7);
    Eigen::VectorXd z(1);
    z << 2.0;
    CHECK(tape.values(z)[0] == doctest::Approx(30.0));
    CHECK(tape.grad_weighted(z, Eigen::VectorXd::Ones(1))[0] == doctest::Approx(44.0));
}
