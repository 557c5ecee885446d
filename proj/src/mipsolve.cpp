#include "sbmiqp/mipsolve.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <queue>
#include <stdexcept>

namespace sbmiqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double a = 1.0;
    for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

struct CoreResult {
    QpStatus status = QpStatus::MaxIter;
    Eigen::VectorXd z;
    Eigen::VectorXd lambda;  // duals of G z <= h
    double value = 0.0;      // 1/2 z^T Q z + c^T z (no constant)
    double err = std::numeric_limits<double>::infinity();  // best scaled KKT error
    int iterations = 0;
};

/// Mehrotra predictor-corrector for
///   min 1/2 z^T Q z + c^T z  s.t.  G z <= h, A z = b.
/// Boxes must already be folded into G. Rows are scaled to unit inf-norm by
/// the caller.
CoreResult solve_qp_core(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                         const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                         const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& z_start) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(h.size());
    const int p = static_cast<int>(b.size());
    CoreResult out;

    Eigen::VectorXd z = z_start;
    if (m == 0) {
        // equality-constrained (or unconstrained) QP: one saddle point solve
        Eigen::MatrixXd M(n + p, n + p);
        M.topLeftCorner(n, n) = Q + 1e-12 * Eigen::MatrixXd::Identity(n, n);
        M.topRightCorner(n, p) = A.transpose();
        M.bottomLeftCorner(p, n) = A;
        M.bottomRightCorner(p, p) = -1e-12 * Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd rhs(n + p);
        rhs.head(n) = -c;
        rhs.tail(p) = b;
        const Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
        out.z = sol.head(n);
        if (!sol.allFinite() || out.z.lpNorm<Eigen::Infinity>() > 1e13) {
            out.status = QpStatus::Unbounded;
            return out;
        }
        out.value = 0.5 * out.z.dot(Q * out.z) + c.dot(out.z);
        // verify stationarity: an inconsistent/singular system means no optimum
        const double res = (Q * out.z + c + A.transpose() * sol.tail(p)).lpNorm<Eigen::Infinity>();
        const double feas = p ? (A * out.z - b).lpNorm<Eigen::Infinity>() : 0.0;
        if (res > 1e-6 * (1.0 + c.lpNorm<Eigen::Infinity>()) || feas > 1e-7) {
            out.status = feas > 1e-7 ? QpStatus::Infeasible : QpStatus::Unbounded;
            return out;
        }
        out.status = QpStatus::Optimal;
        return out;
    }

    Eigen::VectorXd s(m), lam = Eigen::VectorXd::Ones(m);
    {
        const Eigen::VectorXd slack = h - G * z;
        for (int i = 0; i < m; ++i) s[i] = std::max(slack[i], 1.0);
    }
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);

    const double cn = 1.0 + c.lpNorm<Eigen::Infinity>();
    // per-row normalization: a huge rhs in one row (e.g. an artificial box)
    // must not mask violations of small-scale rows
    const Eigen::VectorXd hn = Eigen::VectorXd::Ones(m) + h.cwiseAbs();
    const Eigen::VectorXd bn = Eigen::VectorXd::Ones(p) + b.cwiseAbs();

    const int max_iter = 150;
    // best finite iterate so far, returned on a MaxIter/NaN exit
    double best_err = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_z = z, best_lam = lam;
    int last_improve = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter;
        if (!z.allFinite() || !s.allFinite() || !lam.allFinite()) break;
        const Eigen::VectorXd r_d = Q * z + c + G.transpose() * lam +
                                    (p ? Eigen::VectorXd(A.transpose() * mu)
                                       : Eigen::VectorXd::Zero(n));
        const Eigen::VectorXd r_p = p ? Eigen::VectorXd(A * z - b) : Eigen::VectorXd();
        const Eigen::VectorXd r_g = G * z + s - h;
        const double gap = lam.dot(s) / m;
        const double obj = 0.5 * z.dot(Q * z) + c.dot(z);

        const double err =
            std::max({r_d.lpNorm<Eigen::Infinity>() / cn,
                      p ? r_p.cwiseQuotient(bn).lpNorm<Eigen::Infinity>() : 0.0,
                      r_g.cwiseQuotient(hn).lpNorm<Eigen::Infinity>(),
                      gap / (1.0 + std::abs(obj))});
        if (err < best_err && std::isfinite(obj)) {
            if (err < 0.9 * best_err) last_improve = iter;
            best_err = err;
            best_z = z;
            best_lam = lam;
        }
        // stalled (degenerate face or infeasible problem): stop grinding and
        // let the caller classify the best iterate
        if (iter - last_improve > 20) break;
        if (err <= 1e-9) {
            out.status = QpStatus::Optimal;
            out.z = z;
            out.lambda = lam;
            out.value = obj;
            out.err = err;
            return out;
        }
        if (z.lpNorm<Eigen::Infinity>() > 1e13 || obj < -1e17) {
            out.status = QpStatus::Unbounded;
            out.z = z;
            out.value = obj;
            return out;
        }

        const Eigen::VectorXd D = lam.cwiseQuotient(s);
        Eigen::MatrixXd M(n + p, n + p);
        double delta = 0.0;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu;
        Eigen::VectorXd probe;
        for (int attempt = 0; attempt < 12; ++attempt) {
            M.topLeftCorner(n, n) =
                Q + G.transpose() * D.asDiagonal() * G +
                (delta + 1e-13) * Eigen::MatrixXd::Identity(n, n);
            if (p) {
                M.topRightCorner(n, p) = A.transpose();
                M.bottomLeftCorner(p, n) = A;
                M.bottomRightCorner(p, p) = -(delta + 1e-13) * Eigen::MatrixXd::Identity(p, p);
            }
            lu.compute(M);
            probe = lu.solve(Eigen::VectorXd::Ones(n + p));
            if (probe.allFinite() &&
                (M * probe - Eigen::VectorXd::Ones(n + p)).lpNorm<Eigen::Infinity>() < 1e-4)
                break;
            delta = (delta == 0.0) ? 1e-10 : delta * 100.0;
        }

        auto kkt_solve = [&](const Eigen::VectorXd& rc) {
            // rc is the complementarity residual target: Lam S e - target
            Eigen::VectorXd rhs(n + p);
            rhs.head(n) = -r_d + G.transpose() * (rc.cwiseQuotient(s) - D.cwiseProduct(r_g));
            if (p) rhs.tail(p) = -r_p;
            return Eigen::VectorXd(lu.solve(rhs));
        };

        // predictor
        const Eigen::VectorXd rc_aff = lam.cwiseProduct(s);
        const Eigen::VectorXd sol_aff = kkt_solve(rc_aff);
        const Eigen::VectorXd dz_aff = sol_aff.head(n);
        const Eigen::VectorXd ds_aff = -r_g - G * dz_aff;
        const Eigen::VectorXd dl_aff = -rc_aff.cwiseQuotient(s) - D.cwiseProduct(ds_aff);
        const double ap = max_step(s, ds_aff);
        const double ad = max_step(lam, dl_aff);
        const double gap_aff = (lam + ad * dl_aff).dot(s + ap * ds_aff) / m;
        double sigma = std::pow(std::max(gap_aff, 0.0) / std::max(gap, 1e-300), 3);
        sigma = std::min(1.0, std::max(0.0, sigma));

        // corrector
        const Eigen::VectorXd rc =
            rc_aff + ds_aff.cwiseProduct(dl_aff) -
            Eigen::VectorXd::Constant(m, sigma * gap);
        const Eigen::VectorXd sol = kkt_solve(rc);
        const Eigen::VectorXd dz = sol.head(n);
        const Eigen::VectorXd ds = -r_g - G * dz;
        const Eigen::VectorXd dl = -rc.cwiseQuotient(s) - D.cwiseProduct(ds);

        if (!dz.allFinite() || !ds.allFinite() || !dl.allFinite()) break;
        const double tau = 0.9995;
        const double a_p = std::min(1.0, tau * max_step(s, ds));
        const double a_d = std::min(1.0, tau * max_step(lam, dl));
        z += a_p * dz;
        s += a_p * ds;
        lam += a_d * dl;
        if (p) mu += a_d * sol.tail(p);
    }
    out.status = QpStatus::MaxIter;
    out.z = best_z;
    out.lambda = best_lam;
    out.value = 0.5 * best_z.dot(Q * best_z) + c.dot(best_z);
    out.err = best_err;
    return out;
}

/// Stacks A_in and finite box rows into a single G z <= h system with
/// row scaling applied to the A_in block.
struct Folded {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<int> lo_row;  // lo_row[i] = row of -z_i <= -lo_i, or -1
    std::vector<int> hi_row;
    Eigen::VectorXd z0;
};

Folded fold(const QpProblem& qp) {
    const int n = qp.n();
    const int mi = static_cast<int>(qp.b_in.size());
    Folded f;
    f.lo_row.assign(n, -1);
    f.hi_row.assign(n, -1);
    int extra = 0;
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(qp.lo[i])) ++extra;
        if (std::isfinite(qp.hi[i])) ++extra;
    }
    f.G.setZero(mi + extra, n);
    f.h.resize(mi + extra);
    for (int r = 0; r < mi; ++r) {
        const double scale = std::max(1.0, qp.A_in.row(r).lpNorm<Eigen::Infinity>());
        f.G.row(r) = qp.A_in.row(r) / scale;
        f.h[r] = qp.b_in[r] / scale;
    }
    int r = mi;
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(qp.lo[i])) {
            f.G(r, i) = -1.0;
            f.h[r] = -qp.lo[i];
            f.lo_row[i] = r++;
        }
        if (std::isfinite(qp.hi[i])) {
            f.G(r, i) = 1.0;
            f.h[r] = qp.hi[i];
            f.hi_row[i] = r++;
        }
    }
    const int pe = static_cast<int>(qp.b_eq.size());
    f.A.setZero(pe, n);
    f.b.resize(pe);
    for (int e = 0; e < pe; ++e) {
        const double scale = std::max(1.0, qp.A_eq.row(e).lpNorm<Eigen::Infinity>());
        f.A.row(e) = qp.A_eq.row(e) / scale;
        f.b[e] = qp.b_eq[e] / scale;
    }
    f.z0.resize(n);
    for (int i = 0; i < n; ++i) {
        const bool fl = std::isfinite(qp.lo[i]), fh = std::isfinite(qp.hi[i]);
        if (fl && fh) f.z0[i] = 0.5 * (qp.lo[i] + qp.hi[i]);
        else if (fl) f.z0[i] = qp.lo[i] + 1.0;
        else if (fh) f.z0[i] = qp.hi[i] - 1.0;
        else f.z0[i] = 0.0;
    }
    return f;
}

Eigen::MatrixXd dense_q(const QpProblem& qp) {
    if (qp.Q.size() == 0) return Eigen::MatrixXd::Zero(qp.n(), qp.n());
    return qp.Q;
}

/// Minimum total elastic violation of the constraint system; boxes stay hard.
double min_violation(const Eigen::MatrixXd& Q, const QpProblem& qp, const Folded& f,
                     bool& classified) {
    const int n = qp.n();
    const int mi = static_cast<int>(qp.b_in.size());
    const int pe = static_cast<int>(qp.b_eq.size());
    const int ne = n + mi + 2 * pe;
    (void)Q;
    Eigen::MatrixXd Qe = 1e-8 * Eigen::MatrixXd::Identity(ne, ne);
    Eigen::VectorXd ce = Eigen::VectorXd::Zero(ne);
    ce.tail(mi + 2 * pe).setOnes();

    const int mrows = static_cast<int>(f.h.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(mrows + mi + 2 * pe, ne);
    Eigen::VectorXd h(mrows + mi + 2 * pe);
    G.topLeftCorner(mrows, n) = f.G;
    h.head(mrows) = f.h;
    for (int i = 0; i < mi; ++i) G(i, n + i) = -1.0;        // A_in z - t <= b_in
    for (int i = 0; i < mi + 2 * pe; ++i) {                 // t, u, v >= 0
        G(mrows + i, n + i) = -1.0;
        h[mrows + i] = 0.0;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(pe, ne);
    Eigen::VectorXd b = f.b;
    A.leftCols(n) = f.A;
    for (int e = 0; e < pe; ++e) {
        A(e, n + mi + 2 * e) = 1.0;    // A_eq z + u - v = b_eq
        A(e, n + mi + 2 * e + 1) = -1.0;
    }
    Eigen::VectorXd z0(ne);
    z0.head(n) = f.z0;
    z0.tail(mi + 2 * pe).setConstant(1.0);
    CoreResult r = solve_qp_core(Qe, ce, G, h, A, b, z0);
    // the elastic problem is always feasible, so a near-converged stalled
    // iterate (degenerate optimal faces stall Mehrotra below the 1e-10
    // target) still gives a usable violation estimate
    classified = (r.status == QpStatus::Optimal) ||
                 (r.status == QpStatus::MaxIter && r.err <= 1e-6);
    return classified ? r.z.tail(mi + 2 * pe).sum() : kInf;
}

QpSolution finish(const QpProblem& qp, const CoreResult& r) {
    QpSolution s;
    s.status = r.status;
    s.z = r.z;
    s.value = r.value + qp.c0;
    s.iterations = r.iterations;
    return s;
}

} // namespace

void QpProblem::validate() const {
    const int nn = n();
    if (Q.size() != 0 && (Q.rows() != nn || Q.cols() != nn))
        throw std::invalid_argument("Q dimension mismatch");
    if (lo.size() != nn || hi.size() != nn) throw std::invalid_argument("bound size mismatch");
    if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != nn))
        throw std::invalid_argument("inequality block mismatch");
    if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != nn))
        throw std::invalid_argument("equality block mismatch");
    for (int i = 0; i < nn; ++i)
        if (lo[i] > hi[i]) throw std::invalid_argument("empty box");
}

QpSolution solve_qp(const QpProblem& qp) {
    qp.validate();
    const Folded f = fold(qp);
    const Eigen::MatrixXd Q = dense_q(qp);
    CoreResult r = solve_qp_core(Q, qp.c, f.G, f.h, f.A, f.b, f.z0);
    if (r.status == QpStatus::MaxIter) {
        bool classified = false;
        const double viol = min_violation(Q, qp, f, classified);
        if (classified && viol > 1e-5) r.status = QpStatus::Infeasible;
    }
    return finish(qp, r);
}

Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& Q) {
    if (Q.size() == 0) return Q;
    Eigen::MatrixXd S = 0.5 * (Q + Q.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double floor_val = -1e-8 * std::max(1.0, S.norm());
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < floor_val) throw std::invalid_argument("matrix is indefinite");
        if (ev[i] < 0.0) ev[i] = 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

int pick_branch_variable(const Eigen::VectorXd& z, const std::vector<bool>& is_int,
                         double tol_int) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < z.size(); ++i) {
        if (!is_int[i]) continue;
        const double frac = z[i] - std::floor(z[i]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist <= tol_int) continue;
        const double score = 0.5 - std::abs(frac - 0.5);  // larger = more fractional
        if (score > best_score + 1e-15) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

namespace {

struct Node {
    Eigen::VectorXd lo, hi;  // bounds for integer variables only (full vectors)
    double bound = -kInf;
    long seq = 0;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        return a.seq > b.seq;                              // then earliest node
    }
};

std::vector<long long> integer_key(const Eigen::VectorXd& z, const std::vector<bool>& is_int) {
    std::vector<long long> key;
    for (int i = 0; i < z.size(); ++i)
        if (is_int[i]) key.push_back(std::llround(z[i]));
    return key;
}

} // namespace

MipSolution solve_mip(const MiqpInstance& inst, const MipOptions& opts) {
    inst.qp.validate();
    const int n = inst.qp.n();
    if (static_cast<int>(inst.is_int.size()) != n)
        throw std::invalid_argument("is_int size mismatch");
    for (int i = 0; i < n; ++i)
        if (inst.is_int[i] && (!std::isfinite(inst.qp.lo[i]) || !std::isfinite(inst.qp.hi[i])))
            throw std::invalid_argument("integer variables must have finite bounds");

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    MipSolution out;
    const Eigen::MatrixXd Q = dense_q(inst.qp);

    // root bounds with integer tightening
    Node root;
    root.lo = inst.qp.lo;
    root.hi = inst.qp.hi;
    for (int i = 0; i < n; ++i) {
        if (!inst.is_int[i]) continue;
        root.lo[i] = std::ceil(root.lo[i] - opts.tol_int);
        root.hi[i] = std::floor(root.hi[i] + opts.tol_int);
        if (root.lo[i] > root.hi[i]) {
            out.status = MipStatus::Infeasible;
            return out;
        }
    }

    // the folded G is shared; only box rows of branched variables change
    QpProblem base = inst.qp;
    base.lo = root.lo;
    base.hi = root.hi;
    const Folded f0 = fold(base);

    auto full_value = [&](const Eigen::VectorXd& z) {
        return 0.5 * z.dot(Q * z) + inst.qp.c.dot(z);
    };

    // Solve the node QP with every pinned coordinate (lo == hi) eliminated by
    // substitution. A zero-width box has no interior and stalls the strictly
    // interior core, and branching on a binary pins it, so nearly every node
    // of a binary tree needs this path.
    auto solve_with_pins = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        std::vector<int> free_idx;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (lo[i] < hi[i]) free_idx.push_back(i);
            else w[i] = lo[i];
        }
        const int nf = static_cast<int>(free_idx.size());
        const int mi_rows = static_cast<int>(inst.qp.b_in.size());
        const int pe_rows = static_cast<int>(inst.qp.b_eq.size());
        CoreResult out_r;
        out_r.err = 0.0;
        if (nf == 0) {
            const bool ok =
                (mi_rows == 0 || ((inst.qp.A_in * w - inst.qp.b_in).array() <= 1e-8).all()) &&
                (pe_rows == 0 ||
                 (inst.qp.A_eq * w - inst.qp.b_eq).lpNorm<Eigen::Infinity>() <= 1e-8);
            out_r.status = ok ? QpStatus::Optimal : QpStatus::Infeasible;
            out_r.z = w;
            out_r.value = full_value(w);
            return out_r;
        }
        QpProblem red;
        red.Q.resize(nf, nf);
        red.c.resize(nf);
        red.lo.resize(nf);
        red.hi.resize(nf);
        for (int j = 0; j < nf; ++j) {
            for (int k = 0; k < nf; ++k) red.Q(j, k) = Q(free_idx[j], free_idx[k]);
            red.c[j] = inst.qp.c[free_idx[j]] + Q.row(free_idx[j]).dot(w);
            red.lo[j] = lo[free_idx[j]];
            red.hi[j] = hi[free_idx[j]];
        }
        // rows whose free part vanishes are decided by the pins alone; keeping
        // them would hand the core degenerate 0 <= 0 rows
        std::vector<int> in_keep, eq_keep;
        Eigen::VectorXd bin_red(mi_rows), beq_red(pe_rows);
        for (int r = 0; r < mi_rows; ++r) {
            const double rhs = inst.qp.b_in[r] - inst.qp.A_in.row(r).dot(w);
            double norm = 0.0;
            for (int j = 0; j < nf; ++j) norm += std::abs(inst.qp.A_in(r, free_idx[j]));
            if (norm > 1e-12) {
                bin_red[static_cast<int>(in_keep.size())] = rhs;
                in_keep.push_back(r);
            } else if (rhs < -1e-8) {
                out_r.status = QpStatus::Infeasible;
                return out_r;
            }
        }
        for (int r = 0; r < pe_rows; ++r) {
            const double rhs = inst.qp.b_eq[r] - inst.qp.A_eq.row(r).dot(w);
            double norm = 0.0;
            for (int j = 0; j < nf; ++j) norm += std::abs(inst.qp.A_eq(r, free_idx[j]));
            if (norm > 1e-12) {
                beq_red[static_cast<int>(eq_keep.size())] = rhs;
                eq_keep.push_back(r);
            } else if (std::abs(rhs) > 1e-8) {
                out_r.status = QpStatus::Infeasible;
                return out_r;
            }
        }
        red.A_in.resize(static_cast<int>(in_keep.size()), nf);
        red.b_in = bin_red.head(static_cast<int>(in_keep.size()));
        red.A_eq.resize(static_cast<int>(eq_keep.size()), nf);
        red.b_eq = beq_red.head(static_cast<int>(eq_keep.size()));
        for (std::size_t r = 0; r < in_keep.size(); ++r)
            for (int j = 0; j < nf; ++j)
                red.A_in(static_cast<int>(r), j) = inst.qp.A_in(in_keep[r], free_idx[j]);
        for (std::size_t r = 0; r < eq_keep.size(); ++r)
            for (int j = 0; j < nf; ++j)
                red.A_eq(static_cast<int>(r), j) = inst.qp.A_eq(eq_keep[r], free_idx[j]);

        QpSolution ps = solve_qp(red);
        out_r.status = ps.status;
        out_r.iterations = ps.iterations;
        if (ps.z.size() == nf) {
            Eigen::VectorXd z = w;
            for (int j = 0; j < nf; ++j) z[free_idx[j]] = ps.z[j];
            out_r.z = z;
            out_r.value = full_value(z);
        }
        return out_r;
    };

    auto solve_node = [&](const Node& nd) {
        bool pinned = false;
        for (int i = 0; i < n && !pinned; ++i) pinned = nd.lo[i] == nd.hi[i];
        CoreResult r;
        if (pinned) {
            r = solve_with_pins(nd.lo, nd.hi);
        } else {
            Eigen::VectorXd h = f0.h;
            Eigen::VectorXd z0 = f0.z0;
            for (int i = 0; i < n; ++i) {
                if (f0.lo_row[i] >= 0) h[f0.lo_row[i]] = -nd.lo[i];
                if (f0.hi_row[i] >= 0) h[f0.hi_row[i]] = nd.hi[i];
                if (std::isfinite(nd.lo[i]) && std::isfinite(nd.hi[i]))
                    z0[i] = 0.5 * (nd.lo[i] + nd.hi[i]);
            }
            r = solve_qp_core(Q, inst.qp.c, f0.G, h, f0.A, f0.b, z0);
            if (r.status == QpStatus::MaxIter) {
                QpProblem nqp = inst.qp;
                nqp.lo = nd.lo;
                nqp.hi = nd.hi;
                bool classified = false;
                const double viol = min_violation(Q, nqp, fold(nqp), classified);
                if (classified && viol > 1e-5) r.status = QpStatus::Infeasible;
            }
        }
        // clamp integer coordinates into the node box so that branching on a
        // fractional value always shrinks the box (an inexact MaxIter iterate
        // could otherwise recreate the same node forever)
        if (r.z.size() == n) {
            for (int i = 0; i < n; ++i) {
                if (!inst.is_int[i]) continue;
                if (std::isfinite(nd.lo[i])) r.z[i] = std::max(r.z[i], nd.lo[i]);
                if (std::isfinite(nd.hi[i])) r.z[i] = std::min(r.z[i], nd.hi[i]);
            }
        }
        return r;
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::map<std::vector<long long>, double> seen;
    double ub = kInf;
    Eigen::VectorXd best_z;
    long seq = 0;

    // in pool mode, nodes are kept alive while they may contain one of the
    // pool_size best assignments
    const bool pool_mode = opts.pool_size > 1;
    std::vector<double> best_vals;  // ascending, capped at pool_size
    auto pool_cut = [&] {
        if (!pool_mode) return -kInf;
        if (static_cast<int>(best_vals.size()) < opts.pool_size) return kInf;
        return best_vals.back();
    };

    CoreResult rroot = solve_node(root);
    ++out.nodes;
    if (rroot.status == QpStatus::Infeasible) {
        out.status = MipStatus::Infeasible;
        return out;
    }
    if (rroot.status == QpStatus::Unbounded)
        throw std::runtime_error("solve_mip: unbounded relaxation");
    root.bound = rroot.value - (rroot.status == QpStatus::MaxIter
                                    ? 1e-6 * (1.0 + std::abs(rroot.value))
                                    : 0.0);
    double lb = root.bound;

    auto handle_solution = [&](const Eigen::VectorXd& z, double value) {
        Eigen::VectorXd zi = z;
        for (int i = 0; i < n; ++i)
            if (inst.is_int[i]) zi[i] = std::llround(zi[i]);
        const auto key = integer_key(zi, inst.is_int);
        auto it = seen.find(key);
        if (it == seen.end() || value < it->second) {
            if (it == seen.end()) {
                best_vals.insert(std::lower_bound(best_vals.begin(), best_vals.end(), value),
                                 value);
                if (static_cast<int>(best_vals.size()) > std::max(1, opts.pool_size))
                    best_vals.pop_back();
            }
            seen[key] = value;
        }
        if (value < ub) {
            ub = value;
            best_z = zi;
        }
    };

    // Rounding heuristic: pin the integer coordinates to the rounded node
    // relaxation, eliminate them, and solve the remaining continuous QP.
    // Best-bound search reaches integral leaves late, so without this the
    // incumbent arrives too late to prune wide binary trees.
    std::set<std::vector<long long>> tried_roundings;
    auto try_rounding = [&](const Eigen::VectorXd& zrel) {
        Eigen::VectorXd lo = root.lo, hi = root.hi;
        for (int i = 0; i < n; ++i)
            if (inst.is_int[i])
                lo[i] = hi[i] = std::min(root.hi[i], std::max(root.lo[i], std::round(zrel[i])));
        const auto key = integer_key(lo, inst.is_int);
        if (seen.count(key) || !tried_roundings.insert(key).second) return;
        CoreResult r = solve_with_pins(lo, hi);
        if (r.status == QpStatus::Optimal && r.z.size() == n) handle_solution(r.z, r.value);
    };

    // process the root like any other node
    {
        const int bv = pick_branch_variable(rroot.z, inst.is_int, opts.tol_int);
        if (bv < 0) {
            handle_solution(rroot.z, rroot.value);
            lb = std::min(lb, rroot.value);  // proven: relaxation integral
        } else {
            try_rounding(rroot.z);
            Node left = root, right = root;
            left.hi[bv] = std::floor(rroot.z[bv]);
            right.lo[bv] = std::floor(rroot.z[bv]) + 1.0;
            left.bound = right.bound = root.bound;
            left.seq = ++seq;
            right.seq = ++seq;
            if (left.lo[bv] <= left.hi[bv]) open.push(left);
            if (right.lo[bv] <= right.hi[bv]) open.push(right);
        }
    }

    bool limit_hit = false;
    while (!open.empty()) {
        lb = open.top().bound;
        const double tol = opts.gap * std::max(1.0, std::abs(ub));
        if (std::isfinite(ub) && ub - lb <= tol && lb >= pool_cut() - 1e-12) break;
        if (out.nodes >= opts.max_nodes ||
            (opts.time_limit > 0.0 && elapsed() > opts.time_limit)) {
            limit_hit = true;
            break;
        }
        Node nd = open.top();
        open.pop();
        if (nd.bound >= ub - 1e-12 && nd.bound >= pool_cut() - 1e-12) continue;

        const double t_node = elapsed();
        CoreResult r = solve_node(nd);
        ++out.nodes;
        if (std::getenv("SBMIQP_MIP_DEBUG")) {
            std::fprintf(stderr, "node %ld status=%d iters=%d val=%.6f dt=%.4f bound=%.6f ub=%.6f\n",
                         out.nodes, (int)r.status, r.iterations, r.value, elapsed() - t_node,
                         nd.bound, ub);
        }
        if (r.status == QpStatus::Infeasible) continue;
        const double val = r.value - (r.status == QpStatus::MaxIter
                                          ? 1e-6 * (1.0 + std::abs(r.value))
                                          : 0.0);
        if (val >= ub - 1e-12 && val >= pool_cut() - 1e-12) continue;

        const int bv = pick_branch_variable(r.z, inst.is_int, opts.tol_int);
        if (bv < 0) {
            handle_solution(r.z, r.value);
            continue;
        }
        if (!std::isfinite(ub) || out.nodes % 16 == 0) try_rounding(r.z);
        Node left = nd, right = nd;
        left.hi[bv] = std::floor(r.z[bv]);
        right.lo[bv] = std::floor(r.z[bv]) + 1.0;
        left.bound = right.bound = val;
        left.seq = ++seq;
        right.seq = ++seq;
        if (left.lo[bv] <= left.hi[bv]) open.push(left);
        if (right.lo[bv] <= right.hi[bv]) open.push(right);
    }

    if (!std::isfinite(ub)) {
        out.status = limit_hit ? MipStatus::NoSolution : MipStatus::Infeasible;
        out.bound = open.empty() ? kInf : lb + inst.qp.c0;
        return out;
    }
    out.z = best_z;
    out.value = ub + inst.qp.c0;
    out.bound = (open.empty() ? ub : std::min(ub, lb)) + inst.qp.c0;
    out.gap = std::max(0.0, (ub - (open.empty() ? ub : std::min(ub, lb)))) /
              std::max(1.0, std::abs(out.value));
    out.status = limit_hit && out.gap > opts.gap ? MipStatus::FeasibleGap : MipStatus::Optimal;

    // assemble the pool: best distinct integer assignments, continuous parts
    // recovered by re-solving with the integers pinned
    std::vector<std::pair<double, std::vector<long long>>> ranked;
    ranked.reserve(seen.size());
    for (const auto& [key, value] : seen) ranked.emplace_back(value, key);
    std::sort(ranked.begin(), ranked.end());
    if (static_cast<int>(ranked.size()) > std::max(1, opts.pool_size))
        ranked.resize(std::max(1, opts.pool_size));
    for (const auto& [value, key] : ranked) {
        PoolEntry e;
        e.value = value + inst.qp.c0;
        QpProblem pin = inst.qp;
        std::size_t k = 0;
        for (int i = 0; i < n; ++i)
            if (inst.is_int[i]) pin.lo[i] = pin.hi[i] = static_cast<double>(key[k++]);
        QpSolution ps = solve_qp(pin);
        e.z = (ps.status == QpStatus::Optimal || ps.status == QpStatus::MaxIter) ? ps.z : best_z;
        out.pool.push_back(std::move(e));
    }
    return out;
}

} // namespace sbmiqp
