#include "sbmiqp/nlpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <cstdio>
#include <cstdlib>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct IpmProblem {
    int n = 0;
    Tape tape;                 // outputs: [f, ineq..., eq...]
    int m_ie = 0;              // expression inequalities
    int m_ee = 0;              // expression equalities (incl. degenerate boxes)
    std::vector<int> box_lo;   // variable indices with finite lower bound
    std::vector<int> box_hi;
    Eigen::VectorXd lo, hi;

    int m_i() const { return m_ie + static_cast<int>(box_lo.size() + box_hi.size()); }
    int m_e() const { return m_ee; }
};

IpmProblem build_ipm_problem(const NlpProblem& nlp) {
    IpmProblem p;
    p.n = nlp.n;
    p.lo = nlp.lo;
    p.hi = nlp.hi;
    std::vector<Expr> outputs;
    outputs.push_back(nlp.objective);
    for (const Expr& e : nlp.ineq) outputs.push_back(e);
    std::vector<Expr> eqs = nlp.eq;
    for (int i = 0; i < nlp.n; ++i) {
        if (nlp.lo[i] > nlp.hi[i]) throw std::invalid_argument("empty variable box");
        if (nlp.lo[i] == nlp.hi[i]) {
            eqs.push_back(Expr::variable(i) - nlp.lo[i]);
        } else {
            if (std::isfinite(nlp.lo[i])) p.box_lo.push_back(i);
            if (std::isfinite(nlp.hi[i])) p.box_hi.push_back(i);
        }
    }
    for (const Expr& e : eqs) outputs.push_back(e);
    p.m_ie = static_cast<int>(nlp.ineq.size());
    p.m_ee = static_cast<int>(eqs.size());
    p.tape = Tape(outputs, nlp.n);
    return p;
}

struct PointData {
    double f = 0.0;
    Eigen::VectorXd cI, cE;        // all inequalities (expr + boxes), equalities
    Eigen::VectorXd grad_f;
    Eigen::MatrixXd JI, JE;
};

/// Evaluates values and first derivatives; throws DomainError outside guards.
PointData eval_point(const IpmProblem& p, const Eigen::VectorXd& z, bool with_derivs) {
    PointData d;
    const Eigen::VectorXd vals = p.tape.values(z);
    d.f = vals[0];
    const int nbl = static_cast<int>(p.box_lo.size());
    const int nbh = static_cast<int>(p.box_hi.size());
    d.cI.resize(p.m_i());
    d.cI.head(p.m_ie) = vals.segment(1, p.m_ie);
    for (int i = 0; i < nbl; ++i) d.cI[p.m_ie + i] = p.lo[p.box_lo[i]] - z[p.box_lo[i]];
    for (int i = 0; i < nbh; ++i) d.cI[p.m_ie + nbl + i] = z[p.box_hi[i]] - p.hi[p.box_hi[i]];
    d.cE = vals.segment(1 + p.m_ie, p.m_ee);
    if (with_derivs) {
        const Eigen::MatrixXd jac = p.tape.jacobian(z);
        d.grad_f = jac.row(0).transpose();
        d.JI = Eigen::MatrixXd::Zero(p.m_i(), p.n);
        d.JI.topRows(p.m_ie) = jac.middleRows(1, p.m_ie);
        for (int i = 0; i < nbl; ++i) d.JI(p.m_ie + i, p.box_lo[i]) = -1.0;
        for (int i = 0; i < nbh; ++i) d.JI(p.m_ie + nbl + i, p.box_hi[i]) = 1.0;
        d.JE = jac.middleRows(1 + p.m_ie, p.m_ee);
    }
    return d;
}

Eigen::MatrixXd lagrangian_hessian(const IpmProblem& p, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& lam, const Eigen::VectorXd& mu) {
    Eigen::VectorXd seed(1 + p.m_ie + p.m_ee);
    seed[0] = 1.0;
    seed.segment(1, p.m_ie) = lam.head(p.m_ie);
    seed.segment(1 + p.m_ie, p.m_ee) = mu;
    return p.tape.hessian_weighted(z, seed);
}

struct IpmState {
    Eigen::VectorXd z, s, lam, mu;
    double mu_b = 0.1;
    Eigen::VectorXd nu;     // per-constraint merit penalty weights
    double dw = 0.0;        // last Hessian regularization that worked
    int iterations = 0;
    double theta = kInf;    // constraint violation (1-norm)
    double kkt0 = kInf;     // KKT error at mu_b = 0
    double f = 0.0;
};

double violation_inf(const PointData& d) {
    double v = 0.0;
    for (int i = 0; i < d.cI.size(); ++i) v = std::max(v, d.cI[i]);
    for (int i = 0; i < d.cE.size(); ++i) v = std::max(v, std::abs(d.cE[i]));
    return v;
}

enum class MainResult { Converged, Iterations, Diverged, Breakdown, BadDomain };

/// Core barrier loop. Mutates st; stops on convergence, iteration budget,
/// divergence or stagnation (caller decides the elastic fallback).
MainResult run_main_loop(const IpmProblem& p, IpmState& st, const NlpOptions& opts,
                         int iter_budget, bool allow_stall_exit) {
    const int n = p.n, mI = p.m_i(), mE = p.m_e();
    const double tau = 0.995;

    if (st.s.size() == 0) {
        PointData d0;
        try {
            d0 = eval_point(p, st.z, false);
        } catch (const DomainError&) {
            return MainResult::BadDomain;
        }
        st.s.resize(mI);
        for (int i = 0; i < mI; ++i) st.s[i] = std::max(-d0.cI[i], 1e-2);
        st.lam.resize(mI);
        for (int i = 0; i < mI; ++i) st.lam[i] = st.mu_b / st.s[i];
        st.mu = Eigen::VectorXd::Zero(mE);
    }

    double theta_ref = kInf;
    int theta_ref_iter = 0;

    for (int iter = 0; iter < iter_budget; ++iter) {
        ++st.iterations;
        PointData d;
        try {
            d = eval_point(p, st.z, true);
        } catch (const DomainError&) {
            return MainResult::BadDomain;
        }
        st.f = d.f;
        st.theta = d.cE.lpNorm<1>() + (d.cI + st.s).lpNorm<1>();

        if (!std::isfinite(d.f) || st.z.lpNorm<Eigen::Infinity>() > 1e12) return MainResult::Diverged;
        if (d.f < -1e15) return MainResult::Diverged;

        const Eigen::VectorXd r_d = d.grad_f + d.JI.transpose() * st.lam + d.JE.transpose() * st.mu;
        const Eigen::VectorXd r_I = d.cI + st.s;
        const Eigen::VectorXd& r_E = d.cE;
        const double sd =
            std::max(100.0, (st.lam.lpNorm<1>() + st.mu.lpNorm<1>()) / std::max(1, mI + mE)) / 100.0;

        double comp0 = 0.0, comp_mu = 0.0;
        for (int i = 0; i < mI; ++i) {
            comp0 = std::max(comp0, std::abs(st.lam[i] * st.s[i]));
            comp_mu = std::max(comp_mu, std::abs(st.lam[i] * st.s[i] - st.mu_b));
        }
        const double err_pr = std::max(r_E.size() ? r_E.lpNorm<Eigen::Infinity>() : 0.0,
                                       r_I.size() ? r_I.lpNorm<Eigen::Infinity>() : 0.0);
        const double err_du = (r_d.size() ? r_d.lpNorm<Eigen::Infinity>() : 0.0) / sd;
        st.kkt0 = std::max({err_pr, err_du, comp0 / sd});
        const double err_mu = std::max({err_pr, err_du, comp_mu / sd});

        if (st.kkt0 <= opts.tol_kkt && st.mu_b <= 10 * opts.mu_final) return MainResult::Converged;
        if (err_mu <= 10.0 * st.mu_b && st.mu_b > opts.mu_final) {
            st.mu_b = std::max(opts.mu_final, std::min(0.2 * st.mu_b, std::pow(st.mu_b, 1.2)));
            continue;
        }

        // stagnation exit so the caller can switch to the elastic phase
        if (st.theta < 0.5 * theta_ref) {
            theta_ref = st.theta;
            theta_ref_iter = iter;
        }
        if (allow_stall_exit && st.theta > std::max(1e-4, 100 * opts.tol_feas) &&
            iter - theta_ref_iter >= 60)
            return MainResult::Iterations;

        const Eigen::MatrixXd H = lagrangian_hessian(p, st.z, st.lam, st.mu);
        const Eigen::VectorXd sigma = st.lam.cwiseQuotient(st.s);

        Eigen::MatrixXd JtSJ = Eigen::MatrixXd::Zero(n, n);
        if (mI > 0) JtSJ = d.JI.transpose() * sigma.asDiagonal() * d.JI;

        // rhs pieces independent of regularization
        Eigen::VectorXd top_rhs = -r_d;
        if (mI > 0) {
            // S^-1 r_C - Sigma r_I with r_C = Lam s - mu_b e
            Eigen::VectorXd tmp(mI);
            for (int i = 0; i < mI; ++i)
                tmp[i] = (st.lam[i] - st.mu_b / st.s[i]) - sigma[i] * r_I[i];
            top_rhs += d.JI.transpose() * tmp;
        }

        Eigen::VectorXd dz(n), dmu(mE);
        double dw = (st.dw > 0.0) ? std::max(1e-10, st.dw / 3.0) : 0.0;
        const double dc = 1e-9;
        bool ok = false;
        for (int attempt = 0; attempt < 30 && !ok; ++attempt) {
            Eigen::MatrixXd M(n + mE, n + mE);
            M.topLeftCorner(n, n) = H + JtSJ + dw * Eigen::MatrixXd::Identity(n, n);
            M.topRightCorner(n, mE) = d.JE.transpose();
            M.bottomLeftCorner(mE, n) = d.JE;
            M.bottomRightCorner(mE, mE) = -dc * Eigen::MatrixXd::Identity(mE, mE);
            Eigen::VectorXd rhs(n + mE);
            rhs.head(n) = top_rhs;
            rhs.tail(mE) = -r_E;
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
            const Eigen::VectorXd sol = lu.solve(rhs);
            if (sol.allFinite() && (M * sol - rhs).lpNorm<Eigen::Infinity>() <=
                                       1e-6 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
                dz = sol.head(n);
                dmu = sol.tail(mE);
                // curvature check on the condensed block
                const double curv = dz.dot((H + JtSJ).selfadjointView<Eigen::Lower>() * dz) +
                                    dw * dz.squaredNorm();
                if (curv >= -1e-10 * std::max(1.0, dz.squaredNorm())) {
                    ok = true;
                    st.dw = dw;
                    break;
                }
            }
            dw = (dw == 0.0) ? 1e-6 : dw * 10.0;
            if (dw > 1e10) break;
        }
        if (!ok) return MainResult::Breakdown;

        // recover slack and dual steps from the eliminated rows
        Eigen::VectorXd ds(mI), dlam(mI);
        for (int i = 0; i < mI; ++i) {
            ds[i] = -r_I[i] - d.JI.row(i).dot(dz);
            dlam[i] = -(st.lam[i] * st.s[i] - st.mu_b) / st.s[i] - sigma[i] * ds[i];
        }

        double alpha_p = 1.0, alpha_d = 1.0;
        for (int i = 0; i < mI; ++i) {
            if (ds[i] < 0.0) alpha_p = std::min(alpha_p, -tau * st.s[i] / ds[i]);
            if (dlam[i] < 0.0) alpha_d = std::min(alpha_d, -tau * st.lam[i] / dlam[i]);
        }

        // Per-constraint exact-penalty weights tracking the multiplier
        // magnitudes: a single scalar weight couples large multipliers on one
        // constraint with the curvature of unrelated ones and collapses the
        // accepted step size.
        if (st.nu.size() != mI + mE) st.nu = Eigen::VectorXd::Constant(mI + mE, 0.1);
        for (int i = 0; i < mI; ++i) {
            const double target = std::max(std::abs(st.lam[i]), std::abs(st.lam[i] + dlam[i]));
            st.nu[i] = std::max({0.9 * st.nu[i], 1.2 * target + 0.1});
        }
        for (int j = 0; j < mE; ++j) {
            const double target = std::max(std::abs(st.mu[j]), std::abs(st.mu[j] + dmu[j]));
            st.nu[mI + j] = std::max({0.9 * st.nu[mI + j], 1.2 * target + 0.1});
        }

        // l1 merit with barrier term and weighted infeasibility
        auto weighted_theta = [&](const Eigen::VectorXd& cI, const Eigen::VectorXd& cE,
                                  const Eigen::VectorXd& s) {
            double t = 0.0;
            for (int i = 0; i < mI; ++i) t += st.nu[i] * std::abs(cI[i] + s[i]);
            for (int j = 0; j < mE; ++j) t += st.nu[mI + j] * std::abs(cE[j]);
            return t;
        };
        auto merit = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& s,
                         bool& domain_ok) -> double {
            PointData dd;
            try {
                dd = eval_point(p, z, false);
            } catch (const DomainError&) {
                domain_ok = false;
                return kInf;
            }
            domain_ok = true;
            double bar = 0.0;
            for (int i = 0; i < mI; ++i) bar -= std::log(s[i]);
            return dd.f + st.mu_b * bar + weighted_theta(dd.cI, dd.cE, s);
        };

        double barrier_dir = 0.0;
        for (int i = 0; i < mI; ++i) barrier_dir -= st.mu_b * ds[i] / st.s[i];
        const double obj_dir = d.grad_f.dot(dz) + barrier_dir;
        const double D = obj_dir - weighted_theta(d.cI, d.cE, st.s);

        bool dom0;
        const double phi0 = merit(st.z, st.s, dom0);
        double alpha = alpha_p;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            const Eigen::VectorXd z_new = st.z + alpha * dz;
            const Eigen::VectorXd s_new = st.s + alpha * ds;
            bool dom_new;
            const double phi_new = merit(z_new, s_new, dom_new);
            if (dom_new && phi_new <= phi0 + 1e-4 * alpha * std::min(D, 0.0) + 1e-14 * std::abs(phi0)) {
                st.z = z_new;
                st.s = s_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (std::getenv("SBMIQP_IPM_DEBUG")) {
            std::fprintf(stderr,
                         "it=%3d f=%12.5g th=%9.3g kkt0=%9.3g mu=%8.2g nu=%8.2g a=%8.2g ad=%8.2g dw=%8.2g acc=%d |dz|=%9.3g\n",
                         iter, d.f, st.theta, st.kkt0, st.mu_b,
                         st.nu.size() ? st.nu.maxCoeff() : 0.0, alpha, alpha_d, st.dw,
                         int(accepted), dz.norm());
        }
        if (!accepted) {
            // fall back to a minimal step; next iteration re-regularizes
            const double a = std::min(1e-10, alpha_p);
            st.z += a * dz;
            st.s += a * ds;
            st.dw = std::max(1e-4, st.dw * 10.0);
        }
        st.lam += alpha_d * dlam;
        st.mu += alpha_d * dmu;
        for (int i = 0; i < mI; ++i) st.lam[i] = std::max(st.lam[i], 1e-14);
    }
    return MainResult::Iterations;
}

/// Elastic feasibility problem: minimize total violation of the expression
/// constraints with boxes kept hard.
NlpProblem make_elastic(const NlpProblem& nlp) {
    const int n = nlp.n;
    const int mi = static_cast<int>(nlp.ineq.size());
    const int me = static_cast<int>(nlp.eq.size());
    NlpProblem el;
    el.n = n + mi + 2 * me;
    Expr obj = Expr::constant(0.0);
    for (int i = 0; i < mi + 2 * me; ++i) obj = obj + Expr::variable(n + i);
    el.objective = obj;
    for (int i = 0; i < mi; ++i) el.ineq.push_back(nlp.ineq[i] - Expr::variable(n + i));
    for (int j = 0; j < me; ++j)
        el.eq.push_back(nlp.eq[j] + Expr::variable(n + mi + 2 * j) - Expr::variable(n + mi + 2 * j + 1));
    el.lo.resize(el.n);
    el.hi.resize(el.n);
    el.lo.head(n) = nlp.lo;
    el.hi.head(n) = nlp.hi;
    el.lo.tail(mi + 2 * me).setZero();
    el.hi.tail(mi + 2 * me).setConstant(kInf);
    return el;
}

NlpSolution finalize(const NlpProblem& nlp, const IpmProblem& p, const IpmState& st,
                     NlpStatus status) {
    NlpSolution sol;
    sol.status = status;
    sol.x = st.z;
    sol.objective = st.f;
    sol.lambda = st.lam.size() >= p.m_ie ? Eigen::VectorXd(st.lam.head(p.m_ie)) : Eigen::VectorXd();
    const int me_orig = static_cast<int>(nlp.eq.size());
    sol.mu = st.mu.size() >= me_orig ? Eigen::VectorXd(st.mu.head(me_orig)) : Eigen::VectorXd();
    sol.kkt_residual = st.kkt0;
    sol.iterations = st.iterations;
    try {
        PointData d = eval_point(p, st.z, false);
        sol.constraint_violation = violation_inf(d);
        sol.objective = d.f;
    } catch (const DomainError&) {
        sol.constraint_violation = kInf;
    }
    return sol;
}

NlpSolution solve_nlp_impl(const NlpProblem& nlp, const Eigen::VectorXd& x0, const NlpOptions& opts,
                           bool allow_elastic) {
    IpmProblem p = build_ipm_problem(nlp);
    IpmState st;
    st.z = x0;
    // keep the start strictly inside non-degenerate boxes
    for (int i = 0; i < p.n; ++i) {
        if (nlp.lo[i] < nlp.hi[i]) {
            const double span = std::isfinite(nlp.lo[i]) && std::isfinite(nlp.hi[i])
                                    ? nlp.hi[i] - nlp.lo[i]
                                    : 1.0;
            const double pad = std::min(1e-4 * std::max(span, 1.0), 0.49 * span);
            st.z[i] = std::min(std::max(st.z[i], nlp.lo[i] + pad), nlp.hi[i] - pad);
        } else {
            st.z[i] = nlp.lo[i];
        }
    }

    MainResult r = run_main_loop(p, st, opts, opts.max_iter, allow_elastic);
    if (r == MainResult::Converged) return finalize(nlp, p, st, NlpStatus::Optimal);
    if (r == MainResult::Diverged) return finalize(nlp, p, st, NlpStatus::Unbounded);

    double theta_now = st.theta;
    if ((r == MainResult::Iterations || r == MainResult::Breakdown || r == MainResult::BadDomain) &&
        allow_elastic && theta_now > opts.tol_feas) {
        NlpProblem el = make_elastic(nlp);
        Eigen::VectorXd ez(el.n);
        ez.head(nlp.n) = st.z;
        // seed the elastic variables from the current violation
        try {
            PointData d = eval_point(p, st.z, false);
            for (std::size_t i = 0; i < nlp.ineq.size(); ++i)
                ez[nlp.n + i] = std::max(d.cI[i], 0.0) + 1.0;
            for (std::size_t j = 0; j < nlp.eq.size(); ++j) {
                ez[nlp.n + nlp.ineq.size() + 2 * j] = std::max(-d.cE[j], 0.0) + 1.0;
                ez[nlp.n + nlp.ineq.size() + 2 * j + 1] = std::max(d.cE[j], 0.0) + 1.0;
            }
        } catch (const DomainError&) {
            ez.tail(el.n - nlp.n).setOnes();
        }
        NlpOptions eopts = opts;
        eopts.max_iter = opts.elastic_max_iter;
        NlpSolution esol = solve_nlp_impl(el, ez, eopts, false);
        if (esol.status == NlpStatus::Optimal && esol.objective > opts.tol_infeas) {
            NlpSolution out = finalize(nlp, p, st, NlpStatus::Infeasible);
            out.constraint_violation = esol.objective;
            out.x = esol.x.head(nlp.n);
            return out;
        }
        if (esol.objective <= opts.tol_infeas || esol.status == NlpStatus::Optimal) {
            // restart the main loop from the (nearly) feasible elastic point
            IpmState st2;
            st2.z = esol.x.head(nlp.n);
            MainResult r2 = run_main_loop(p, st2, opts, opts.max_iter, false);
            if (r2 == MainResult::Converged) return finalize(nlp, p, st2, NlpStatus::Optimal);
            if (r2 == MainResult::Diverged) return finalize(nlp, p, st2, NlpStatus::Unbounded);
            return finalize(nlp, p, st2,
                            r2 == MainResult::Iterations ? NlpStatus::MaxIter : NlpStatus::Breakdown);
        }
    }
    if (r == MainResult::Iterations) return finalize(nlp, p, st, NlpStatus::MaxIter);
    return finalize(nlp, p, st, NlpStatus::Breakdown);
}

} // namespace

NlpSolution solve_nlp(const NlpProblem& nlp, const Eigen::VectorXd& x0, const NlpOptions& opts) {
    if (x0.size() != nlp.n) throw std::invalid_argument("solve_nlp: start point dimension mismatch");
    return solve_nlp_impl(nlp, x0, opts, true);
}

Eigen::VectorXd box_midpoint(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd z(lo.size());
    for (int i = 0; i < lo.size(); ++i) {
        const bool fl = std::isfinite(lo[i]), fh = std::isfinite(hi[i]);
        if (fl && fh) z[i] = 0.5 * (lo[i] + hi[i]);
        else if (fl) z[i] = lo[i] + 1.0;
        else if (fh) z[i] = hi[i] - 1.0;
        else z[i] = 0.0;
    }
    return z;
}

JEval eval_J(const ModelMinlp& model, const Eigen::VectorXd& y_fix,
             const std::optional<Eigen::VectorXd>& x_warm, const NlpOptions& opts) {
    if (!model.y_in_bounds(y_fix)) throw OutOfBounds("eval_J: point outside the integer set");
    NlpProblem joint = relax_integrality(model);
    const int me_before = static_cast<int>(joint.eq.size());
    for (int j = 0; j < model.ny; ++j)
        joint.eq.push_back(Expr::variable(model.nx + j) - y_fix[j]);

    Eigen::VectorXd z0(joint.n);
    if (x_warm && x_warm->size() == model.nx) {
        z0.head(model.nx) = *x_warm;
    } else {
        z0.head(model.nx) = box_midpoint(model.x_lo, model.x_hi);
    }
    z0.tail(model.ny) = y_fix;

    NlpSolution sol = solve_nlp(joint, z0, opts);
    JEval je;
    je.y = y_fix;
    if (sol.status == NlpStatus::Infeasible) {
        je.feasible = false;
        return je;
    }
    if (sol.status == NlpStatus::Unbounded || sol.status == NlpStatus::Breakdown)
        throw NumericalBreakdown("eval_J: pinned NLP did not converge");
    if (sol.status == NlpStatus::MaxIter && sol.constraint_violation > opts.tol_feas) {
        je.feasible = false;
        return je;
    }
    je.feasible = true;
    je.J = sol.objective;
    je.x = sol.x.head(model.nx);
    je.subgrad = -sol.mu.segment(me_before, model.ny);
    return je;
}

FeasibilityResult solve_feasibility(const ModelMinlp& model, const Eigen::VectorXd& y_hat,
                                    const std::optional<Eigen::VectorXd>& y_best,
                                    const NlpOptions& opts) {
    NlpProblem joint = relax_integrality(model);
    Expr dist = Expr::constant(0.0);
    for (int j = 0; j < model.ny; ++j)
        dist = dist + square(Expr::variable(model.nx + j) - y_hat[j]);
    joint.objective = dist;
    if (y_best) {
        const double radius2 = (*y_best - y_hat).squaredNorm();
        Expr ball = Expr::constant(-radius2);
        for (int j = 0; j < model.ny; ++j)
            ball = ball + square((*y_best)[j] - Expr::variable(model.nx + j));
        joint.ineq.push_back(ball);
    }

    Eigen::VectorXd z0(joint.n);
    z0.head(model.nx) = box_midpoint(model.x_lo, model.x_hi);
    for (int j = 0; j < model.ny; ++j)
        z0[model.nx + j] = std::min(std::max(y_hat[j], model.y_lo[j]), model.y_hi[j]);

    NlpSolution sol = solve_nlp(joint, z0, opts);
    if (sol.status == NlpStatus::Infeasible)
        throw RestorationFailed("relaxed feasible set is empty");
    if (sol.status != NlpStatus::Optimal &&
        !(sol.status == NlpStatus::MaxIter && sol.constraint_violation <= opts.tol_feas))
        throw NumericalBreakdown("feasibility problem did not converge");

    FeasibilityResult fr;
    fr.y_bar = sol.x.tail(model.ny);
    fr.x = sol.x.head(model.nx);
    fr.J_f = (fr.y_bar - y_hat).squaredNorm();
    return fr;
}

RelaxationResult solve_relaxation(const ModelMinlp& model, const NlpOptions& opts) {
    NlpProblem relaxed = relax_integrality(model);
    Eigen::VectorXd z0 = box_midpoint(relaxed.lo, relaxed.hi);
    NlpSolution sol = solve_nlp(relaxed, z0, opts);
    RelaxationResult rr;
    rr.status = sol.status;
    if (sol.status == NlpStatus::Optimal ||
        (sol.status == NlpStatus::MaxIter && sol.constraint_violation <= opts.tol_feas)) {
        rr.lb = sol.objective;
        rr.x = sol.x.head(model.nx);
        rr.y = sol.x.tail(model.ny);
        rr.heuristic_lb = !model.declared_convex;
    }
    return rr;
}

} // namespace sbmiqp
