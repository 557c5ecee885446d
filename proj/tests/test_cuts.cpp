#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sbmiqp/cuts.hpp"
#include "sbmiqp/errors.hpp"

using namespace sbmiqp;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd y(1);
    y << v;
    return y;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd y(2);
    y << a, b;
    return y;
}

} // namespace

TEST_CASE("dataset recording, duplicates and best index") {
    Dataset ds;
    CHECK(ds.best_index() == -1);

    const int i0 = ds.record_infeasible(vec1(4.0), vec1(2.0), 4.0, Eigen::VectorXd());
    CHECK(i0 == 0);
    CHECK(ds.best_index() == 0);  // no feasible record yet: least J_f
    ds.record_infeasible(vec1(-4.0), vec1(-2.0), 4.0, Eigen::VectorXd());
    CHECK(ds.best_index() == 0);  // tie: smallest index
    ds.record_infeasible(vec1(3.5), vec1(2.0), 2.25, Eigen::VectorXd());
    CHECK(ds.best_index() == 2);

    const int f0 = ds.record_feasible(vec1(2.0), 9.0, Eigen::VectorXd(), vec1(-4.0));
    CHECK(ds.best_index() == f0);  // any feasible record beats all infeasible ones
    ds.record_feasible(vec1(-3.0), 4.0, Eigen::VectorXd(), vec1(-44.0));
    CHECK(ds.best_index() == 4);
    ds.record_feasible(vec1(1.0), 4.0, Eigen::VectorXd(), vec1(-12.0));
    CHECK(ds.best_index() == 4);  // tie on J: smallest index

    CHECK(ds.contains(vec1(2.0)));
    CHECK_FALSE(ds.contains(vec1(0.0)));
    CHECK_THROWS_AS(ds.record_feasible(vec1(2.0), 1.0, Eigen::VectorXd(), vec1(0.0)),
                    DuplicateIterate);
    CHECK_THROWS_AS(ds.record_infeasible(vec1(4.0), vec1(2.0), 4.0, Eigen::VectorXd()),
                    DuplicateIterate);
}

TEST_CASE("gradient correction: inactive when the cut underestimates") {
    // f(y) = y^2: cut at y_i = 1 (J = 1, grad = 2) underestimates f(3) = 9
    bool corrected = true;
    Eigen::VectorXd g =
        correct_gradient(1.0, vec1(2.0), vec1(1.0), 9.0, vec1(3.0),
                         Eigen::MatrixXd::Identity(1, 1), &corrected);
    CHECK_FALSE(corrected);
    CHECK(g[0] == doctest::Approx(2.0));
}

TEST_CASE("gradient correction on the 1-D nonconvex quartic") {
    // J(y) = (y^2 - 5)^2 + 4y: J(2) = 9, J'(2) = -4, J(-3) = 4.
    // The cut at y = 2 overestimates J(-3); the corrected slope is 1.
    bool corrected = false;
    Eigen::VectorXd g =
        correct_gradient(9.0, vec1(-4.0), vec1(2.0), 4.0, vec1(-3.0),
                         Eigen::MatrixXd::Identity(1, 1), &corrected);
    CHECK(corrected);
    CHECK(g[0] == doctest::Approx(1.0));
    // secant consistency: the corrected cut is exact at the best point
    CHECK(9.0 + g[0] * (-3.0 - 2.0) == doctest::Approx(4.0));
}

TEST_CASE("corrected gradient is the minimal W-norm secant-consistent choice") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3;
        Eigen::VectorXd y_i(n), y_b(n), grad(n);
        for (int i = 0; i < n; ++i) {
            y_i[i] = unif(rng);
            y_b[i] = unif(rng);
            grad[i] = unif(rng);
        }
        if ((y_b - y_i).norm() < 1e-3) continue;
        Eigen::VectorXd wdiag(n);
        for (int i = 0; i < n; ++i) wdiag[i] = 0.5 + std::abs(unif(rng));
        const Eigen::MatrixXd W = wdiag.asDiagonal();
        const double J_i = unif(rng);
        const double J_b = J_i + grad.dot(y_b - y_i) - (0.1 + std::abs(unif(rng)));  // force r < 0

        bool corrected = false;
        const Eigen::VectorXd g = correct_gradient(J_i, grad, y_i, J_b, y_b, W, &corrected);
        REQUIRE(corrected);
        // (1) exactness at the best point
        CHECK(J_i + g.dot(y_b - y_i) == doctest::Approx(J_b).epsilon(1e-9));
        // (2) any other secant-consistent gradient has a larger W-norm distance
        const double dist = (g - grad).dot(W * (g - grad));
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v[i] = unif(rng);
            const Eigen::VectorXd dy = y_b - y_i;
            v -= (v.dot(dy) / dy.squaredNorm()) * dy;  // now v^T dy = 0
            if (v.norm() < 1e-9) continue;
            const Eigen::VectorXd alt = g + v;
            CHECK(J_i + alt.dot(dy) == doctest::Approx(J_b).epsilon(1e-9));
            const double alt_dist = (alt - grad).dot(W * (alt - grad));
            CHECK(alt_dist >= dist - 1e-10);
        }
    }
}

TEST_CASE("amplify scales and validates rho") {
    Eigen::VectorXd g = amplify(vec2(1.0, -2.0), 1.5);
    CHECK(g[0] == doctest::Approx(1.5));
    CHECK(g[1] == doctest::Approx(-3.0));
    CHECK_THROWS_AS(amplify(vec1(1.0), 0.99), InvalidRho);
    CHECK(amplify(vec1(2.0), 1.0)[0] == doctest::Approx(2.0));
}

TEST_CASE("infeasibility sigma") {
    // y_hat = 4, y_bar = 2: offset active only when the best point lies on
    // the cut-off side
    CHECK(infeasibility_sigma(vec1(4.0), vec1(2.0), vec1(-2.0)) == doctest::Approx(0.0));
    CHECK(infeasibility_sigma(vec1(4.0), vec1(2.0), vec1(3.0)) == doctest::Approx(2.0));
    CHECK(infeasibility_sigma(vec2(4.0, 0.0), vec2(2.0, 0.0), vec2(2.0, 5.0)) ==
          doctest::Approx(0.0));
}

TEST_CASE("reduced_rhs interpolates and validates alpha") {
    CHECK(reduced_rhs(10.0, 2.0, 0.2) == doctest::Approx(0.2 * 10.0 + 0.8 * 2.0));
    CHECK(reduced_rhs(10.0, 2.0, 1.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(reduced_rhs(10.0, 2.0, 0.0), InvalidAlpha);
    CHECK_THROWS_AS(reduced_rhs(10.0, 2.0, 1.5), InvalidAlpha);
}

TEST_CASE("row constructors") {
    EvalRecord rec;
    rec.y = vec2(1.0, 2.0);
    rec.feasible = true;
    rec.J = 5.0;
    rec.grad = vec2(3.0, -1.0);
    rec.grad_eff = rec.grad;

    CutRow row = region_row(rec, 8.0);
    // 5 + g^T (y - y_i) <= 8  <=>  g^T y <= 8 - 5 + g^T y_i = 3 + 1
    CHECK(row.a.isApprox(rec.grad));
    CHECK(row.b == doctest::Approx(8.0 - 5.0 + 1.0));
    // the cut holds with equality when J_LB(y) = J_bar
    // J_LB(y) = 5 + 3(y1-1) - (y2-2) = 8 at y = (2, 2): a^T y = 4 = b
    CHECK(row.a.dot(vec2(2.0, 2.0)) == doctest::Approx(row.b));

    EpigraphRow ep = epigraph_row(rec);
    // eta >= 5 + g^T(y - y_i): at y = y_i, a^T y - b = J
    CHECK(ep.a.dot(rec.y) - ep.b == doctest::Approx(5.0));

    EvalRecord inf;
    inf.y = vec1(4.0);
    inf.y_bar = vec1(2.0);
    inf.sigma = 2.0;
    CutRow ir = infeasibility_row(inf);
    // (4-2)(y-2) - 2 <= 0  <=>  2y <= 6
    CHECK(ir.a[0] == doctest::Approx(2.0));
    CHECK(ir.b == doctest::Approx(6.0));
}

TEST_CASE("apply_safeguards recomputes everything against the current best") {
    // quartic example again: feasible at 2 (J=9, J'=-4) and -3 (J=4, J'=-44),
    // infeasible proposal at 4 projected to 2.5
    Dataset ds;
    ds.record_feasible(vec1(2.0), 9.0, Eigen::VectorXd(), vec1(-4.0));
    ds.record_feasible(vec1(-3.0), 4.0, Eigen::VectorXd(), vec1(-44.0));
    ds.record_infeasible(vec1(4.0), vec1(2.5), 2.25, Eigen::VectorXd());
    const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(1, 1);

    SafeguardStats st = ds.apply_safeguards(1, W, 5.0, true);
    CHECK(st.corrections == 1);
    CHECK(ds[0].corrected);
    CHECK(ds[0].grad_eff[0] == doctest::Approx(5.0));  // corrected 1, amplified by 5
    CHECK_FALSE(ds[1].corrected);
    CHECK(ds[1].grad_eff[0] == doctest::Approx(-44.0));  // best record stays raw
    // sigma for y_hat=4, y_bar=2.5, best=-3: (1.5)(-5.5) < 0 -> 0
    CHECK(ds[2].sigma == doctest::Approx(0.0));
    CHECK(st.positive_sigmas == 0);

    // best changes to index 0 (pretend): corrections recomputed from scratch
    st = ds.apply_safeguards(0, W, 5.0, true);
    // cut at -3 vs best 2: r = 9 - 4 - (-44)(5) = 225 > 0 -> no correction
    CHECK(st.corrections == 0);
    CHECK(ds[1].grad_eff[0] == doctest::Approx(-44.0));
    // sigma vs best 2: (1.5)(-0.5) < 0 -> 0
    CHECK(ds[2].sigma == doctest::Approx(0.0));

    // disabled: raw gradients, zero sigmas
    st = ds.apply_safeguards(1, W, 5.0, false);
    CHECK(st.corrections == 0);
    CHECK(ds[0].grad_eff[0] == doctest::Approx(-4.0));

    CHECK_THROWS_AS(ds.apply_safeguards(1, W, 0.5, true), InvalidRho);
    CHECK_THROWS_AS(ds.apply_safeguards(99, W, 1.5, true), std::out_of_range);
}

TEST_CASE("sigma counted when positive") {
    Dataset ds;
    ds.record_feasible(vec1(3.0), 1.0, Eigen::VectorXd(), vec1(0.0));
    ds.record_infeasible(vec1(5.0), vec1(2.0), 9.0, Eigen::VectorXd());
    SafeguardStats st =
        ds.apply_safeguards(0, Eigen::MatrixXd::Identity(1, 1), 1.5, true);
    CHECK(st.positive_sigmas == 1);
    CHECK(ds[1].sigma == doctest::Approx(3.0));  // (5-2)(3-2)
}
