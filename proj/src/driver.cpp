#include "sbmiqp/driver.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>

#include "sbmiqp/errors.hpp"

namespace sbmiqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArtificialBound = 1e9;   // continuous master variables
constexpr double kEtaBound = 1e8;          // epigraph variable

/// Convexified Hessian: negative eigenvalues clamped to zero.
Eigen::MatrixXd clamp_psd(const Eigen::MatrixXd& M) {
    Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Incremental row collector for master assembly.
struct RowAccum {
    int n;
    std::vector<Eigen::VectorXd> ain, aeq;
    std::vector<double> bin, beq;

    explicit RowAccum(int n_vars) : n(n_vars) {}

    void add(const Eigen::VectorXd& a, double b, bool equality) {
        (equality ? aeq : ain).push_back(a);
        (equality ? beq : bin).push_back(b);
    }

    /// Pads a row over one block into the full layout.
    void add_block(const Eigen::VectorXd& a, int offset, double b, bool equality) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        full.segment(offset, a.size()) = a;
        add(full, b, equality);
    }

    void fill(QpProblem& qp) const {
        qp.A_in.resize(static_cast<int>(ain.size()), n);
        qp.b_in.resize(static_cast<int>(ain.size()));
        for (std::size_t i = 0; i < ain.size(); ++i) {
            qp.A_in.row(static_cast<int>(i)) = ain[i].transpose();
            qp.b_in[static_cast<int>(i)] = bin[i];
        }
        qp.A_eq.resize(static_cast<int>(aeq.size()), n);
        qp.b_eq.resize(static_cast<int>(aeq.size()));
        for (std::size_t i = 0; i < aeq.size(); ++i) {
            qp.A_eq.row(static_cast<int>(i)) = aeq[i].transpose();
            qp.b_eq[static_cast<int>(i)] = beq[i];
        }
    }
};

void add_model_rows(const ModelMinlp& model, RowAccum& acc, int n_total) {
    (void)n_total;
    for (const LinearRow& r : model.x_rows) acc.add_block(r.coeffs, 0, r.rhs, r.equality);
    for (const LinearRow& r : model.y_rows) acc.add_block(r.coeffs, model.nx, r.rhs, r.equality);
}

void add_dataset_rows(const Dataset& ds, RowAccum& acc, int nx, double J_bar, bool epigraph,
                      int eta_index) {
    for (int i = 0; i < ds.size(); ++i) {
        const EvalRecord& rec = ds[i];
        if (rec.feasible) {
            if (epigraph) {
                const EpigraphRow row = epigraph_row(rec);
                Eigen::VectorXd a = Eigen::VectorXd::Zero(acc.n);
                a.segment(nx, row.a.size()) = row.a;
                a[eta_index] = -1.0;
                acc.add(a, row.b, false);
            } else {
                const CutRow row = region_row(rec, J_bar);
                acc.add_block(row.a, nx, row.b, false);
            }
        } else {
            const CutRow row = infeasibility_row(rec);
            acc.add_block(row.a, nx, row.b, false);
        }
    }
}

Eigen::VectorXd expansion_point(const ModelMinlp& model, const EvalRecord& b) {
    Eigen::VectorXd zb(model.n_vars());
    zb << b.x, (b.feasible ? b.y : b.y_bar);
    return zb;
}

void set_bounds(const ModelMinlp& model, QpProblem& qp, int n, bool with_eta) {
    qp.lo.resize(n);
    qp.hi.resize(n);
    for (int i = 0; i < model.nx; ++i) {
        qp.lo[i] = std::max(model.x_lo[i], -kArtificialBound);
        qp.hi[i] = std::min(model.x_hi[i], kArtificialBound);
    }
    qp.lo.segment(model.nx, model.ny) = model.y_lo;
    qp.hi.segment(model.nx, model.ny) = model.y_hi;
    if (with_eta) {
        qp.lo[n - 1] = -kEtaBound;
        qp.hi[n - 1] = kEtaBound;
    }
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::TimeLimit: return "time_limit";
    }
    return "unknown";
}

MiqpInstance assemble_br_miqp(const ModelMinlp& model, const Dataset& ds, int best,
                              double J_bar, HessianMode mode) {
    const int nx = model.nx, ny = model.ny, n = nx + ny;
    const EvalRecord& b = ds[best];
    const Eigen::VectorXd zb = expansion_point(model, b);
    DerivativeOracle oracle(model);

    Eigen::MatrixXd B;
    switch (mode) {
        case HessianMode::Exact: B = clamp_psd(oracle.hess_f(zb)); break;
        case HessianMode::GaussNewton:
            B = gauss_newton_hessian(model, zb.head(nx), zb.tail(ny));
            B = clamp_psd(B);
            break;
        case HessianMode::Zero: B = Eigen::MatrixXd::Zero(n, n); break;
    }

    const double f0 = oracle.f(zb);
    const Eigen::VectorXd gf = oracle.grad_f(zb);

    MiqpInstance inst;
    inst.qp.Q = B;
    inst.qp.c = gf - B * zb;
    inst.qp.c0 = f0 - gf.dot(zb) + 0.5 * zb.dot(B * zb);

    RowAccum acc(n);
    const Eigen::VectorXd g0 = oracle.g(zb);
    const Eigen::MatrixXd Jg = oracle.jac_g(zb);
    for (int i = 0; i < g0.size(); ++i)
        acc.add(Jg.row(i).transpose(), Jg.row(i).dot(zb) - g0[i], false);
    const Eigen::VectorXd h0 = oracle.h(zb);
    const Eigen::MatrixXd Jh = oracle.jac_h(zb);
    for (int i = 0; i < h0.size(); ++i)
        acc.add(Jh.row(i).transpose(), Jh.row(i).dot(zb) - h0[i], true);
    add_model_rows(model, acc, n);
    add_dataset_rows(ds, acc, nx, J_bar, /*epigraph=*/false, -1);
    acc.fill(inst.qp);

    set_bounds(model, inst.qp, n, /*with_eta=*/false);
    inst.is_int.assign(n, false);
    for (int j = 0; j < ny; ++j) inst.is_int[nx + j] = true;
    return inst;
}

MiqpInstance assemble_lb_milp(const ModelMinlp& model, const Dataset& ds, int best) {
    const int nx = model.nx, ny = model.ny, n = nx + ny + 1;
    const int eta = n - 1;

    MiqpInstance inst;
    inst.qp.Q = Eigen::MatrixXd::Zero(n, n);
    inst.qp.c = Eigen::VectorXd::Zero(n);
    inst.qp.c[eta] = 1.0;

    RowAccum acc(n);
    const EvalRecord& b = ds[best];
    if (b.feasible) {
        // outer approximation rows are only valid around a feasible point
        const Eigen::VectorXd zb = expansion_point(model, b);
        DerivativeOracle oracle(model);
        const double f0 = oracle.f(zb);
        const Eigen::VectorXd gf = oracle.grad_f(zb);
        Eigen::VectorXd frow = Eigen::VectorXd::Zero(n);
        frow.head(nx + ny) = gf;
        frow[eta] = -1.0;
        acc.add(frow, gf.dot(zb) - f0, false);

        const Eigen::VectorXd g0 = oracle.g(zb);
        const Eigen::MatrixXd Jg = oracle.jac_g(zb);
        for (int i = 0; i < g0.size(); ++i) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
            a.head(nx + ny) = Jg.row(i).transpose();
            acc.add(a, Jg.row(i).dot(zb) - g0[i], false);
        }
        const Eigen::VectorXd h0 = oracle.h(zb);
        const Eigen::MatrixXd Jh = oracle.jac_h(zb);
        for (int i = 0; i < h0.size(); ++i) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
            a.head(nx + ny) = Jh.row(i).transpose();
            acc.add(a, Jh.row(i).dot(zb) - h0[i], true);
        }
    }
    add_model_rows(model, acc, n);
    add_dataset_rows(ds, acc, nx, 0.0, /*epigraph=*/true, eta);
    acc.fill(inst.qp);

    set_bounds(model, inst.qp, n, /*with_eta=*/true);
    inst.is_int.assign(n, false);
    for (int j = 0; j < ny; ++j) inst.is_int[nx + j] = true;
    return inst;
}

SolveResult run(const ModelMinlp& model, const DriverOptions& opts) {
    model.validate();
    if (!(opts.alpha > 0.0) || opts.alpha > 1.0) throw InvalidAlpha("alpha must be in (0, 1]");
    if (opts.rho < 1.0) throw InvalidRho("rho must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        return (opts.time_limit > 0.0 && seconds_since(t0) > opts.time_limit) ||
               (opts.cancel && opts.cancel());
    };

    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(model.ny, model.ny);
    if (opts.w_diag) {
        if (opts.w_diag->size() != model.ny)
            throw std::invalid_argument("w_diag size mismatch");
        if (opts.w_diag->minCoeff() <= 0.0)
            throw std::invalid_argument("w_diag entries must be positive");
        W = opts.w_diag->asDiagonal();
    }

    SolveResult res;
    res.status = SolveStatus::IterationLimit;

    // continuous relaxation: initial lower bound and initial iterate
    double lb = -kInf;
    Eigen::VectorXd yk;
    {
        const RelaxationResult rr = solve_relaxation(model, opts.nlp);
        if (rr.status == NlpStatus::Infeasible) {
            res.status = SolveStatus::Infeasible;
            res.lb = kInf;
            res.objective = kInf;
            return res;
        }
        if (rr.y.size() == model.ny) {
            lb = rr.lb;
            yk = rr.y;
            for (int j = 0; j < model.ny; ++j)
                yk[j] = std::min(std::max(std::round(yk[j]), model.y_lo[j]), model.y_hi[j]);
        } else {
            yk = box_midpoint(model.y_lo, model.y_hi);
            for (int j = 0; j < model.ny; ++j)
                yk[j] = std::min(std::max(std::round(yk[j]), model.y_lo[j]), model.y_hi[j]);
        }
    }
    if (opts.y0) {
        if (!model.y_in_bounds(*opts.y0))
            throw OutOfBounds("initial iterate outside the integer set");
        yk = *opts.y0;
    }

    Dataset& ds = res.dataset;
    double ub = kInf;
    double v_last = -kInf;  // value of the last master; -inf forces BR first
    int best = -1;
    std::vector<Eigen::VectorXd> pending = {yk};

    int k = 0;
    for (; k < opts.max_iter; ++k) {
        if (out_of_time()) {
            res.status = SolveStatus::TimeLimit;
            break;
        }
        TraceIter ti;
        ti.k = k;

        // evaluate the proposals of this iteration
        int evals = 0;
        const auto t_nlp0 = std::chrono::steady_clock::now();
        for (const Eigen::VectorXd& y : pending) {
            if (ds.contains(y)) continue;
            JEval je = eval_J(model, y, best >= 0 ? std::optional<Eigen::VectorXd>(ds[best].x)
                                                  : std::nullopt,
                              opts.nlp);
            if (je.feasible) {
                ds.record_feasible(y, je.J, je.x, je.subgrad);
            } else {
                std::optional<Eigen::VectorXd> y_best;
                if (ds.has_feasible()) y_best = ds[ds.best_index()].y;
                FeasibilityResult fr;
                try {
                    fr = solve_feasibility(model, y, y_best, opts.nlp);
                } catch (const RestorationFailed&) {
                    res.status = ds.has_feasible() ? SolveStatus::Feasible
                                                   : SolveStatus::Infeasible;
                    res.iterations = k;
                    res.lb = lb;
                    res.objective = kInf;
                    if (ds.has_feasible()) {
                        const int b = ds.best_index();
                        res.x = ds[b].x;
                        res.y = ds[b].y;
                        res.objective = ds[b].J;
                    }
                    return res;
                }
                ds.record_infeasible(y, fr.y_bar, fr.J_f, fr.x);
            }
            if (evals == 0) {
                ti.y = y;
                ti.feasible = je.feasible;
                ti.value = je.feasible ? je.J : ds[ds.size() - 1].J;
            }
            ++evals;
        }
        ti.t_nlp = seconds_since(t_nlp0);
        if (evals == 0) {
            // every proposal was already evaluated: the masters cannot make
            // progress, stop with the best point found
            res.status = ds.has_feasible() ? SolveStatus::Feasible : SolveStatus::Infeasible;
            break;
        }
        ti.extra_evals = evals - 1;

        best = ds.best_index();
        ub = ds[best].feasible ? ds[best].J : kInf;
        const SafeguardStats stats = ds.apply_safeguards(best, W, opts.rho, opts.safeguards);
        ti.corrections = stats.corrections;
        ti.positive_sigmas = stats.positive_sigmas;
        ti.lb = lb;
        ti.ub = ub;
        ti.best_index = best;

        const double tol = std::max(opts.tol_abs, opts.tol_rel * std::abs(ub));
        if (std::isfinite(ub) && ub <= lb + tol) {
            ti.master = "none";
            res.trace.iters.push_back(std::move(ti));
            res.status = model.declared_convex ? SolveStatus::Optimal : SolveStatus::Feasible;
            ++k;
            break;
        }

        // masters
        pending.clear();
        const auto t_mip0 = std::chrono::steady_clock::now();
        MipOptions mo;
        mo.gap = opts.gap;
        mo.pool_size = opts.pool_size;
        if (opts.time_limit > 0.0)
            mo.time_limit = std::max(0.1, opts.time_limit - seconds_since(t0));

        auto push_proposals = [&](const MipSolution& ms) {
            for (const PoolEntry& e : ms.pool) {
                Eigen::VectorXd y = e.z.segment(model.nx, model.ny);
                for (int j = 0; j < model.ny; ++j)
                    y[j] = std::min(std::max(std::round(y[j]), model.y_lo[j]),
                                    model.y_hi[j]);
                pending.push_back(y);
            }
        };

        bool need_milp = true;
        if (v_last <= ub) {
            const double lb_eff = std::isfinite(lb) ? lb : ub;
            const double J_bar = std::isfinite(ub) ? reduced_rhs(ub, lb_eff, opts.alpha) : kInf;
            const MiqpInstance br = assemble_br_miqp(model, ds, best, J_bar, opts.hessian);
            const MipSolution ms = solve_mip(br, mo);
            if ((ms.status == MipStatus::Optimal || ms.status == MipStatus::FeasibleGap) &&
                ms.value <= ub) {
                ti.master = "br-miqp";
                ti.V = ms.value;
                v_last = ms.value;
                push_proposals(ms);
                need_milp = false;
            }
        }

        if (need_milp) {
            const MiqpInstance lbm = assemble_lb_milp(model, ds, best);
            const MipSolution ms = solve_mip(lbm, mo);
            ti.master = "lb-milp";
            if (ms.status == MipStatus::Infeasible) {
                // no integer assignment satisfies the accumulated cuts
                ti.V = kInf;
                ti.t_mip = seconds_since(t_mip0);
                res.trace.iters.push_back(std::move(ti));
                if (std::isfinite(ub)) {
                    lb = ub;
                    res.status =
                        model.declared_convex ? SolveStatus::Optimal : SolveStatus::Feasible;
                } else {
                    res.status = SolveStatus::Infeasible;
                }
                ++k;
                break;
            }
            if (ms.status == MipStatus::NoSolution) {
                res.trace.iters.push_back(std::move(ti));
                res.status = out_of_time() ? SolveStatus::TimeLimit : SolveStatus::IterationLimit;
                ++k;
                break;
            }
            ti.V = ms.value;
            if (model.declared_convex) lb = std::max(lb, std::min(ms.value, ub));
            const bool heuristic_hit = opts.stop == StopRule::Heuristic && std::isfinite(ub) &&
                                       ms.value >= ub - tol;
            if (heuristic_hit || (std::isfinite(ub) && ub <= lb + tol)) {
                ti.t_mip = seconds_since(t_mip0);
                res.trace.iters.push_back(std::move(ti));
                res.status = model.declared_convex ? SolveStatus::Optimal : SolveStatus::Feasible;
                ++k;
                break;
            }
            push_proposals(ms);
            v_last = -kInf;  // try the region master again next iteration
        }
        ti.t_mip = seconds_since(t_mip0);
        res.trace.iters.push_back(std::move(ti));
    }

    res.iterations = k;
    res.lb = lb;
    if (ds.size() > 0 && ds.has_feasible()) {
        const int b = ds.best_index();
        res.x = ds[b].x;
        res.y = ds[b].y;
        res.objective = ds[b].J;
        if (res.status == SolveStatus::Infeasible) res.status = SolveStatus::Feasible;
    } else {
        res.objective = kInf;
        if (res.status == SolveStatus::IterationLimit || res.status == SolveStatus::TimeLimit) {
            // keep the limit status; no feasible point was found
        }
    }
    return res;
}

} // namespace sbmiqp
