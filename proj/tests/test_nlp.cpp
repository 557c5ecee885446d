#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbmiqp/errors.hpp"
#include "sbmiqp/nlpsolve.hpp"

using namespace sbmiqp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelMinlp make_tutorial() {
    ModelMinlp m;
    m.nx = 1;
    m.ny = 2;
    Expr x = Expr::variable(0), y1 = Expr::variable(1), y2 = Expr::variable(2);
    m.objective = square(y1 - 4.1) + square(y2 - 4.0) + 1000.0 * x;
    m.ineq = {square(y1) + square(y2) - 9.0 - x, -x};
    m.x_lo.resize(1);
    m.x_hi.resize(1);
    m.x_lo << -kInf;
    m.x_hi << kInf;
    m.y_lo.resize(2);
    m.y_hi.resize(2);
    m.y_lo << -10.0, -10.0;
    m.y_hi << 10.0, 10.0;
    m.declared_convex = true;
    return m;
}

} // namespace

TEST_CASE("scalar inequality-constrained QP: min x^2 s.t. x >= 1") {
    NlpProblem nlp;
    nlp.n = 1;
    Expr x = Expr::variable(0);
    nlp.objective = square(x);
    nlp.ineq = {1.0 - x};
    nlp.lo.resize(1);
    nlp.hi.resize(1);
    nlp.lo << -kInf;
    nlp.hi << kInf;
    Eigen::VectorXd x0(1);
    x0 << 5.0;
    NlpSolution sol = solve_nlp(nlp, x0);
    REQUIRE(sol.status == NlpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.lambda[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("equality-constrained quadratic with analytic multiplier") {
    // min (x0-1)^2 + (x1-2)^2 s.t. x0 + x1 = 1; optimum (0, 1), mu = 2
    NlpProblem nlp;
    nlp.n = 2;
    Expr a = Expr::variable(0), b = Expr::variable(1);
    nlp.objective = square(a - 1.0) + square(b - 2.0);
    nlp.eq = {a + b - 1.0};
    nlp.lo = Eigen::VectorXd::Constant(2, -kInf);
    nlp.hi = Eigen::VectorXd::Constant(2, kInf);
    NlpSolution sol = solve_nlp(nlp, Eigen::VectorXd::Zero(2));
    REQUIRE(sol.status == NlpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.mu[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("active box bound") {
    NlpProblem nlp;
    nlp.n = 1;
    nlp.objective = square(Expr::variable(0) - 3.0);
    nlp.lo.resize(1);
    nlp.hi.resize(1);
    nlp.lo << 0.0;
    nlp.hi << 2.0;
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    NlpSolution sol = solve_nlp(nlp, x0);
    REQUIRE(sol.status == NlpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("degenerate box becomes an equality") {
    NlpProblem nlp;
    nlp.n = 2;
    Expr a = Expr::variable(0), b = Expr::variable(1);
    nlp.objective = square(a) + square(b - 1.0);
    nlp.lo.resize(2);
    nlp.hi.resize(2);
    nlp.lo << 5.0, -kInf;
    nlp.hi << 5.0, kInf;
    NlpSolution sol = solve_nlp(nlp, Eigen::VectorXd::Zero(2));
    REQUIRE(sol.status == NlpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("nonlinear: Rosenbrock with a constraint") {
    // min 100 (x1 - x0^2)^2 + (1 - x0)^2 s.t. x0^2 + x1^2 <= 1
    NlpProblem nlp;
    nlp.n = 2;
    Expr a = Expr::variable(0), b = Expr::variable(1);
    nlp.objective = 100.0 * square(b - square(a)) + square(1.0 - a);
    nlp.ineq = {square(a) + square(b) - 1.0};
    nlp.lo = Eigen::VectorXd::Constant(2, -kInf);
    nlp.hi = Eigen::VectorXd::Constant(2, kInf);
    NlpSolution sol = solve_nlp(nlp, Eigen::VectorXd::Zero(2));
    REQUIRE(sol.status == NlpStatus::Optimal);
    // known optimum of this classic instance
    CHECK(sol.x[0] == doctest::Approx(0.7864).epsilon(1e-3));
    CHECK(sol.x[1] == doctest::Approx(0.6177).epsilon(1e-3));
    CHECK(sol.constraint_violation <= 1e-6);
}

TEST_CASE("infeasible constraint set is detected") {
    NlpProblem nlp;
    nlp.n = 1;
    Expr x = Expr::variable(0);
    nlp.objective = square(x);
    nlp.ineq = {x - (-1.0), 1.0 - x};  // x <= -1 and x >= 1
    nlp.lo.resize(1);
    nlp.hi.resize(1);
    nlp.lo << -kInf;
    nlp.hi << kInf;
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    NlpSolution sol = solve_nlp(nlp, x0);
    CHECK(sol.status == NlpStatus::Infeasible);
    CHECK(sol.constraint_violation > 1e-6);
}

TEST_CASE("unbounded objective is flagged") {
    NlpProblem nlp;
    nlp.n = 1;
    nlp.objective = Expr::variable(0);
    nlp.lo.resize(1);
    nlp.hi.resize(1);
    nlp.lo << -kInf;
    nlp.hi << kInf;
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    NlpSolution sol = solve_nlp(nlp, x0);
    CHECK((sol.status == NlpStatus::Unbounded || sol.status == NlpStatus::MaxIter));
}

TEST_CASE("eval_J reproduces the pinned tutorial values and subgradients") {
    ModelMinlp m = make_tutorial();

    Eigen::VectorXd y(2);
    y << 0.0, 4.0;
    JEval je = eval_J(m, y);
    REQUIRE(je.feasible);
    CHECK(je.J == doctest::Approx(7016.81).epsilon(1e-6));
    CHECK(je.x[0] == doctest::Approx(7.0).epsilon(1e-5));
    CHECK(je.subgrad[0] == doctest::Approx(-8.2).epsilon(1e-4));
    CHECK(je.subgrad[1] == doctest::Approx(8000.0).epsilon(1e-5));

    y << 3.0, 2.0;
    je = eval_J(m, y);
    REQUIRE(je.feasible);
    CHECK(je.J == doctest::Approx(4005.21).epsilon(1e-6));
    CHECK(je.subgrad[0] == doctest::Approx(5997.8).epsilon(1e-5));
    CHECK(je.subgrad[1] == doctest::Approx(3996.0).epsilon(1e-5));

    y << 2.0, 2.0;
    je = eval_J(m, y);
    REQUIRE(je.feasible);
    CHECK(je.J == doctest::Approx(8.41).epsilon(1e-6));
    CHECK(je.subgrad[0] == doctest::Approx(-4.2).epsilon(1e-4));
    CHECK(je.subgrad[1] == doctest::Approx(-4.0).epsilon(1e-4));
}

TEST_CASE("eval_J subgradient provides a valid Benders underestimate (convex case)") {
    ModelMinlp m = make_tutorial();
    Eigen::VectorXd y0(2), y1(2);
    y0 << 2.0, 2.0;
    y1 << 0.0, 4.0;
    JEval a = eval_J(m, y0);
    JEval b = eval_J(m, y1);
    REQUIRE(a.feasible);
    REQUIRE(b.feasible);
    // J(y1) >= J(y0) + g(y0)^T (y1 - y0)
    CHECK(b.J >= a.J + a.subgrad.dot(y1 - y0) - 1e-6);
    CHECK(a.J >= b.J + b.subgrad.dot(y0 - y1) - 1e-6);
}

TEST_CASE("eval_J flags an infeasible pin") {
    ModelMinlp m = make_tutorial();
    m.x_hi[0] = 5.0;  // y=(0,4) needs x >= 7
    Eigen::VectorXd y(2);
    y << 0.0, 4.0;
    JEval je = eval_J(m, y);
    CHECK_FALSE(je.feasible);
    CHECK(je.J == kInf);
}

TEST_CASE("eval_J rejects points outside the integer set") {
    ModelMinlp m = make_tutorial();
    Eigen::VectorXd y(2);
    y << 0.5, 4.0;
    CHECK_THROWS_AS(eval_J(m, y), OutOfBounds);
}

TEST_CASE("solve_feasibility projects onto the relaxed feasible set") {
    // F: y^2 <= 4 (with a dummy continuous variable), project y_hat = 4
    ModelMinlp m;
    m.nx = 1;
    m.ny = 1;
    Expr x = Expr::variable(0), y = Expr::variable(1);
    m.objective = square(x);
    m.ineq = {square(y) - 4.0};
    m.x_lo.resize(1);
    m.x_hi.resize(1);
    m.x_lo << -1.0;
    m.x_hi << 1.0;
    m.y_lo.resize(1);
    m.y_hi.resize(1);
    m.y_lo << -4.0;
    m.y_hi << 4.0;
    Eigen::VectorXd y_hat(1);
    y_hat << 4.0;
    FeasibilityResult fr = solve_feasibility(m, y_hat);
    CHECK(fr.y_bar[0] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(fr.J_f == doctest::Approx(4.0).epsilon(1e-4));

    // with a best point the ball constraint keeps the projection valid here
    Eigen::VectorXd y_best(1);
    y_best << -2.0;
    FeasibilityResult fb = solve_feasibility(m, y_hat, y_best);
    CHECK(fb.y_bar[0] == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("solve_feasibility throws when the relaxed set is empty") {
    ModelMinlp m;
    m.nx = 1;
    m.ny = 1;
    Expr x = Expr::variable(0), y = Expr::variable(1);
    m.objective = square(x);
    m.ineq = {square(y) + square(x) + 1.0};  // never <= 0
    m.x_lo.resize(1);
    m.x_hi.resize(1);
    m.x_lo << -1.0;
    m.x_hi << 1.0;
    m.y_lo.resize(1);
    m.y_hi.resize(1);
    m.y_lo << -4.0;
    m.y_hi << 4.0;
    Eigen::VectorXd y_hat(1);
    y_hat << 0.0;
    CHECK_THROWS_AS(solve_feasibility(m, y_hat), RestorationFailed);
}

TEST_CASE("solve_relaxation reproduces the tutorial bound") {
    ModelMinlp m = make_tutorial();
    RelaxationResult rr = solve_relaxation(m);
    REQUIRE((rr.status == NlpStatus::Optimal || rr.status == NlpStatus::MaxIter));
    CHECK(rr.lb == doctest::Approx(7.4394).epsilon(1e-3));
    CHECK_FALSE(rr.heuristic_lb);
    // the relaxed optimum sits on the circle of radius 3
    CHECK(rr.y.squaredNorm() == doctest::Approx(9.0).epsilon(1e-4));
}

TEST_CASE("box_midpoint handles one-sided and free variables") {
    Eigen::VectorXd lo(4), hi(4);
    lo << 0.0, -kInf, 2.0, -kInf;
    hi << 4.0, 3.0, kInf, kInf;
    Eigen::VectorXd z = box_midpoint(lo, hi);
    CHECK(z[0] == doctest::Approx(2.0));
    CHECK(z[1] == doctest::Approx(2.0));
    CHECK(z[2] == doctest::Approx(3.0));
    CHECK(z[3] == doctest::Approx(0.0));
}
