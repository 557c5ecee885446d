#include "sbmiqp/bench.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "sbmiqp/errors.hpp"
#include "sbmiqp/nlpsolve.hpp"

namespace sbmiqp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBlowUp = 10.0;  // trajectory divergence guard for the unstable dynamics
} // namespace

ModelMinlp tutorial_problem() {
    ModelMinlp m;
    m.nx = 1;
    m.ny = 2;
    Expr x = Expr::variable(0), y1 = Expr::variable(1), y2 = Expr::variable(2);
    m.objective = square(y1 - 4.1) + square(y2 - 4.0) + 1000.0 * x;
    m.ineq = {square(y1) + square(y2) - 9.0 - x, -x};
    m.x_lo = Eigen::VectorXd::Constant(1, -kInf);
    m.x_hi = Eigen::VectorXd::Constant(1, kInf);
    m.y_lo = Eigen::VectorXd::Constant(2, -10.0);
    m.y_hi = Eigen::VectorXd::Constant(2, 10.0);
    const double r2 = std::sqrt(2.0);
    ObjectiveSplit split;
    split.f1 = {r2 * (y1 - 4.1), r2 * (y2 - 4.0)};
    split.f2 = 1000.0 * x;
    m.split = std::move(split);
    m.declared_convex = true;
    m.x_names = {"x"};
    m.y_names = {"y1", "y2"};
    return m;
}

ModelMinlp nonconvex_integer_problem() {
    ModelMinlp m;
    m.nx = 1;
    m.ny = 1;
    Expr x = Expr::variable(0), y = Expr::variable(1);
    m.objective = square(square(y) - 5.0) + 4.0 * y + x;
    m.x_lo = Eigen::VectorXd::Constant(1, 0.0);
    m.x_hi = Eigen::VectorXd::Constant(1, 0.0);
    m.y_lo = Eigen::VectorXd::Constant(1, -4.0);
    m.y_hi = Eigen::VectorXd::Constant(1, 4.0);
    m.declared_convex = false;
    m.x_names = {"x"};
    m.y_names = {"y"};
    return m;
}

namespace {

// Symbolic one-step RK4 map for xdot = x^3 - u; u is held constant over the
// interval, so every stage uses the same control expression.
Expr rk4_step_expr(const OcpSpec& spec, const Expr& x, const Expr& u) {
    const double h = spec.ts;
    auto f = [&u](const Expr& xi) { return xi * xi * xi - u; };
    Expr k1 = f(x);
    Expr k2 = f(x + (h / 2.0) * k1);
    Expr k3 = f(x + (h / 2.0) * k2);
    Expr k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

double ocp_rk4_step(const OcpSpec& spec, double x, double u) {
    const double h = spec.ts;
    auto f = [u](double xi) { return xi * xi * xi - u; };
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h * k2);
    const double k4 = f(x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ModelMinlp unstable_ocp(const OcpSpec& spec) {
    if (spec.N < 1) throw std::invalid_argument("unstable_ocp: N must be >= 1");
    const int N = spec.N;
    ModelMinlp m;
    m.nx = N + 1;  // x_0 .. x_N
    m.ny = N;      // u_0 .. u_{N-1}
    auto xk = [](int k) { return Expr::variable(k); };
    auto uk = [N](int k) { return Expr::variable(N + 1 + k); };

    Expr cost = Expr::constant(0.0);
    ObjectiveSplit split;
    const double r2 = std::sqrt(2.0);
    for (int k = 0; k <= N; ++k) {
        cost = cost + square(xk(k) - spec.x_ref);
        split.f1.push_back(r2 * (xk(k) - spec.x_ref));
    }
    split.f2 = Expr::constant(0.0);
    m.objective = cost;
    m.split = std::move(split);

    m.eq.push_back(xk(0) - spec.x_init);
    for (int k = 0; k < N; ++k) m.eq.push_back(xk(k + 1) - rk4_step_expr(spec, xk(k), uk(k)));

    // State box mirrors the simulation blow-up guard: trajectories past |x| or
    // 10 have diverged, and leaving them unbounded makes the restoration NLP
    // ill-posed under the unstable cubic dynamics.
    m.x_lo = Eigen::VectorXd::Constant(N + 1, -kBlowUp);
    m.x_hi = Eigen::VectorXd::Constant(N + 1, kBlowUp);
    m.y_lo = Eigen::VectorXd::Zero(N);
    m.y_hi = Eigen::VectorXd::Ones(N);

    // Dwell rule: -u_k + u_{k-1} - u_{k-2} <= 0 (missing indices are 0), so a
    // control switched on one step ago must stay on.
    for (int k = 0; k < N; ++k) {
        LinearRow row;
        row.coeffs = Eigen::VectorXd::Zero(N);
        row.coeffs[k] = -1.0;
        if (k - 1 >= 0) row.coeffs[k - 1] += 1.0;
        if (k - 2 >= 0) row.coeffs[k - 2] -= 1.0;
        row.rhs = 0.0;
        m.y_rows.push_back(std::move(row));
    }

    for (int k = 0; k <= N; ++k) m.x_names.push_back("x" + std::to_string(k));
    for (int k = 0; k < N; ++k) m.y_names.push_back("u" + std::to_string(k));
    m.declared_convex = false;  // the shooting equalities are cubic
    return m;
}

double ocp_sequence_cost(const OcpSpec& spec, const std::vector<int>& u) {
    if (static_cast<int>(u.size()) != spec.N)
        throw std::invalid_argument("ocp_sequence_cost: sequence length must equal N");
    int um1 = 0, um2 = 0;
    double x = spec.x_init;
    double cost = 0.0;
    for (int k = 0; k < spec.N; ++k) {
        if (u[k] < um1 - um2) return kInf;  // dwell violation
        cost += (x - spec.x_ref) * (x - spec.x_ref);
        x = ocp_rk4_step(spec, x, static_cast<double>(u[k]));
        if (std::abs(x) > kBlowUp) return kInf;
        um2 = um1;
        um1 = u[k];
    }
    cost += (x - spec.x_ref) * (x - spec.x_ref);
    return cost;
}

namespace {

struct BruteForceState {
    const OcpSpec* spec = nullptr;
    double best = kInf;
    std::vector<int> best_u, cur;
    std::int64_t nodes = 0;

    void dfs(int k, double x, double cost, int um1, int um2) {
        ++nodes;
        cost += (x - spec->x_ref) * (x - spec->x_ref);
        if (cost >= best) return;  // costs are monotone sums of squares
        if (k == spec->N) {
            best = cost;
            best_u = cur;
            return;
        }
        for (int u = 0; u <= 1; ++u) {
            if (u < um1 - um2) continue;  // dwell rule
            const double xn = ocp_rk4_step(*spec, x, static_cast<double>(u));
            if (std::abs(xn) > kBlowUp) continue;
            cur[k] = u;
            dfs(k + 1, xn, cost, u, um1);
        }
    }
};

} // namespace

BruteForceResult brute_force_ocp(const OcpSpec& spec) {
    BruteForceState st;
    st.spec = &spec;
    st.cur.assign(spec.N, 0);
    st.dfs(0, spec.x_init, 0.0, 0, 0);
    BruteForceResult res;
    res.u = st.best_u;
    res.objective = st.best;
    res.nodes = st.nodes;
    return res;
}

double objective_ratio(double V, double V_min) {
    const double m = std::min(V_min - 1.0, 0.0);
    return (V - m) / (V_min - m);
}

ModelMinlp random_convex_minlp(unsigned seed, int nx, int ny) {
    if (ny < 1 || ny > 4) throw std::invalid_argument("random_convex_minlp: need 1 <= ny <= 4");
    if (nx < 1) throw std::invalid_argument("random_convex_minlp: need nx >= 1");
    const int n = nx + ny;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u11(-1.0, 1.0);
    std::uniform_int_distribution<int> ui(-2, 2);

    // Strictly convex quadratic objective 1/2 (z-t)' M (z-t), M = A'A + I.
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = u11(rng);
    Eigen::MatrixXd M = A.transpose() * A + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) t[i] = 2.0 * u11(rng);

    // Ball constraint centered on a point whose integer part is integral, so
    // the feasible set always contains an integer assignment.
    Eigen::VectorXd c(n);
    for (int i = 0; i < nx; ++i) c[i] = u11(rng);
    for (int j = 0; j < ny; ++j) c[nx + j] = static_cast<double>(ui(rng));
    std::uniform_real_distribution<double> ur(2.0, 3.5);
    const double radius = ur(rng);

    ModelMinlp m;
    m.nx = nx;
    m.ny = ny;
    std::vector<Expr> z;
    for (int i = 0; i < n; ++i) z.push_back(Expr::variable(i));

    Expr obj = Expr::constant(0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) obj = obj + (0.5 * M(i, j)) * (z[i] - t[i]) * (z[j] - t[j]);
    m.objective = obj;

    Expr ball = Expr::constant(-radius * radius);
    for (int i = 0; i < n; ++i) ball = ball + square(z[i] - c[i]);
    m.ineq.push_back(ball);

    if (nx >= 2) {
        Expr plane = Expr::constant(0.0);
        double rhs = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double a = u11(rng);
            plane = plane + a * z[i];
            rhs += a * c[i];
        }
        m.eq.push_back(plane - rhs);
    }

    m.x_lo = Eigen::VectorXd::Constant(nx, -5.0);
    m.x_hi = Eigen::VectorXd::Constant(nx, 5.0);
    m.y_lo = Eigen::VectorXd::Constant(ny, -5.0);
    m.y_hi = Eigen::VectorXd::Constant(ny, 5.0);
    m.declared_convex = true;
    for (int i = 0; i < nx; ++i) m.x_names.push_back("x" + std::to_string(i));
    for (int j = 0; j < ny; ++j) m.y_names.push_back("y" + std::to_string(j));
    return m;
}

double enumerate_minlp(const ModelMinlp& model, Eigen::VectorXd* best_y) {
    double best = kInf;
    Eigen::VectorXd y(model.ny);
    std::vector<long> idx(model.ny);
    std::vector<long> counts(model.ny);
    for (int j = 0; j < model.ny; ++j) {
        idx[j] = 0;
        counts[j] = static_cast<long>(model.y_hi[j] - model.y_lo[j]) + 1;
    }
    for (;;) {
        for (int j = 0; j < model.ny; ++j) y[j] = model.y_lo[j] + static_cast<double>(idx[j]);
        JEval ev = eval_J(model, y);
        if (ev.feasible && ev.J < best) {
            best = ev.J;
            if (best_y) *best_y = y;
        }
        int j = 0;
        while (j < model.ny && ++idx[j] == counts[j]) idx[j++] = 0;
        if (j == model.ny) break;
    }
    return best;
}

} // namespace sbmiqp
