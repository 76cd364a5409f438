#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "netslice/scaled.hpp"

namespace netslice {

struct BarrierOptions {
    double tol = 1e-8;            // target KKT (stationarity) residual
    double barrier_init = 1.0;    // barrier weight schedule: geometric
    double barrier_shrink = 0.1;
    double barrier_min = 1e-9;
    int max_newton_per_stage = 80;
    // Invoked per inner Newton iterate with the current merit value.
    std::function<void(int stage, int iter, double merit)> on_iterate;
};

// One convex subproblem over a subset of cells of a ScaledModel:
//   min  sum_{s in cells} f_s(x_s) + (rho/2)||x - center||^2
//   s.t. b >= b_floor + eps,  mu >= lambda + eps,  t_sn <= sla_n,
//        per-cell budget rows, and (optionally) sum mu <= gamma.
// Coordinates listed in `fixed` are pinned to `fixed_values`.
struct BarrierProblem {
    const ScaledModel* model = nullptr;
    std::vector<int> cells;
    bool include_gamma = false;
    double rho = 0.0;
    VectorXd center;                // local dimension; ignored when rho == 0
    std::vector<std::uint8_t> fixed;  // local dimension; empty means none
    VectorXd fixed_values;

    int nvar() const { return 2 * model->N * int(cells.size()); }
    bool is_fixed(int i) const { return !fixed.empty() && fixed[size_t(i)] != 0; }
};

struct BarrierResult {
    VectorXd x;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double gamma_multiplier = 0.0;  // scaled-unit estimate; 0 when absent
    double objective = 0.0;         // f part only, seconds
};

namespace detail {

struct BarrierEval {
    double phi;       // merit: objective + prox + barrier
    VectorXd grad;    // full local dimension (fixed coords zeroed)
    MatrixXd hess;
    bool feasible;    // all barrier constraints strictly satisfied
};

// Evaluates merit, gradient and Hessian of the barrier objective at x.
// When need_derivs is false only phi/feasible are filled.
inline BarrierEval eval_barrier(const BarrierProblem& p, const VectorXd& x, double w,
                                bool need_derivs) {
    const ScaledModel& m = *p.model;
    const int N = m.N;
    const int nv = p.nvar();
    BarrierEval ev;
    ev.phi = 0.0;
    ev.feasible = true;
    if (need_derivs) {
        ev.grad = VectorXd::Zero(nv);
        ev.hess = MatrixXd::Zero(nv, nv);
    }

    auto add_log = [&](double g, const std::vector<std::pair<int, double>>& grad_g,
                       const std::vector<std::pair<int, double>>& diag_hess_g) {
        // Rows pinned entirely by fixed variables are constant: check them
        // (equality-tight proportional allocations are allowed) and skip the
        // barrier term.
        bool all_fixed = true;
        for (const auto& [i, gi] : grad_g)
            if (!p.is_fixed(i)) {
                all_fixed = false;
                break;
            }
        if (all_fixed) {
            if (g > 1e-7) {
                ev.feasible = false;
                ev.phi = std::numeric_limits<double>::infinity();
            }
            return;
        }
        // g must be < 0; contributes -w*log(-g).
        if (!(g < 0.0)) {
            ev.feasible = false;
            ev.phi = std::numeric_limits<double>::infinity();
            return;
        }
        ev.phi += -w * std::log(-g);
        if (!need_derivs) return;
        const double c1 = w / (-g);
        const double c2 = w / (g * g);
        for (const auto& [i, gi] : grad_g) {
            ev.grad(i) += c1 * gi;
            for (const auto& [j, gj] : grad_g) ev.hess(i, j) += c2 * gi * gj;
        }
        for (const auto& [i, hii] : diag_hess_g) ev.hess(i, i) += c1 * hii;
    };

    double gamma_sum = 0.0;
    std::vector<std::pair<int, double>> gamma_grad;
    gamma_grad.reserve(size_t(nv) / 2);

    for (int c = 0; c < int(p.cells.size()); ++c) {
        const int s = p.cells[c];
        double budget = 0.0;
        std::vector<std::pair<int, double>> budget_grad;
        budget_grad.reserve(N);
        for (int n = 0; n < N; ++n) {
            const int ib = 2 * N * c + n;
            const int im = 2 * N * c + N + n;
            const double b = x(ib);
            const double mu = x(im);
            const double lam = m.lambda(s, n);
            const double a = m.comm_coeff(s, n);

            if (!(b > 0.0) || !(mu > lam)) {
                ev.feasible = false;
                ev.phi = std::numeric_limits<double>::infinity();
                return ev;
            }
            const double slack = mu - lam;

            // objective terms
            ev.phi += a / b + m.queue_coeff / slack;
            if (need_derivs) {
                ev.grad(ib) += -a / (b * b);
                ev.grad(im) += -m.queue_coeff / (slack * slack);
                ev.hess(ib, ib) += 2.0 * a / (b * b * b);
                ev.hess(im, im) += 2.0 * m.queue_coeff / (slack * slack * slack);
            }

            // bound constraints
            add_log(m.b_floor(s) + m.eps_b - b, {{ib, -1.0}}, {});
            if (!ev.feasible) return ev;
            add_log(lam + m.eps_mu - mu, {{im, -1.0}}, {});
            if (!ev.feasible) return ev;

            // SLA: a/b + q/(mu-lam) <= sla_n
            const double t = a / b + m.queue_coeff / slack;
            add_log(t - m.sla(n),
                    {{ib, -a / (b * b)}, {im, -m.queue_coeff / (slack * slack)}},
                    {{ib, 2.0 * a / (b * b * b)},
                     {im, 2.0 * m.queue_coeff / (slack * slack * slack)}});
            if (!ev.feasible) return ev;

            budget += m.theta(s, n) * b;
            budget_grad.push_back({ib, m.theta(s, n)});
            gamma_sum += mu;
            gamma_grad.push_back({im, 1.0});
        }
        add_log(budget - m.beta(s), budget_grad, {});
        if (!ev.feasible) return ev;
    }
    if (p.include_gamma) {
        add_log(gamma_sum - m.gamma, gamma_grad, {});
        if (!ev.feasible) return ev;
    }

    if (p.rho > 0.0) {
        const VectorXd d = x - p.center;
        ev.phi += 0.5 * p.rho * d.squaredNorm();
        if (need_derivs) {
            ev.grad += p.rho * d;
            ev.hess.diagonal().array() += p.rho;
        }
    }

    if (need_derivs) {
        for (int i = 0; i < nv; ++i)
            if (p.is_fixed(i)) {
                ev.grad(i) = 0.0;
                ev.hess.row(i).setZero();
                ev.hess.col(i).setZero();
                ev.hess(i, i) = 1.0;
            }
    }
    return ev;
}

}  // namespace detail

// Strictly feasible starting point, or InfeasibleError with the offending
// cell. The local feasible set leaves mu unbounded above, so emptiness
// reduces to a closed-form bandwidth test per cell (plus the gamma row).
inline VectorXd barrier_feasible_start(const BarrierProblem& p) {
    const ScaledModel& m = *p.model;
    const int N = m.N;
    VectorXd x(p.nvar());

    struct FreeMu {
        int idx;       // local coordinate
        double lam;
        double rem;    // SLA headroom left for queueing [s]
    };
    std::vector<FreeMu> free_mu;
    double mu_total = 0.0;

    for (int c = 0; c < int(p.cells.size()); ++c) {
        const int s = p.cells[c];
        // Pass 1: bandwidths.
        double fixed_used = 0.0, req_total = 0.0;
        std::vector<double> b_req(N, 0.0);
        std::vector<bool> b_free(N, false);
        for (int n = 0; n < N; ++n) {
            const int ib = 2 * N * c + n;
            const int im = 2 * N * c + N + n;
            if (p.is_fixed(ib)) {
                x(ib) = p.fixed_values(ib);
                fixed_used += m.theta(s, n) * x(ib);
                continue;
            }
            double sla_room = m.sla(n);
            if (p.is_fixed(im)) {
                const double slack = p.fixed_values(im) - m.lambda(s, n);
                if (!(slack > m.eps_mu * 0.5))
                    throw InfeasibleError("cell " + std::to_string(s) + " service " +
                                          std::to_string(n) + ": fixed mu does not exceed lambda");
                sla_room -= m.queue_coeff / slack;
                if (!(sla_room > 0.0))
                    throw InfeasibleError("cell " + std::to_string(s) + " service " +
                                          std::to_string(n) +
                                          ": SLA unreachable with fixed processing rate");
            }
            b_free[n] = true;
            b_req[n] = std::max(m.b_floor(s) + 2.0 * m.eps_b,
                                m.comm_coeff(s, n) / (0.9 * sla_room));
            req_total += m.theta(s, n) * b_req[n];
        }
        const double budget = 0.999 * m.beta(s);
        int k_free = 0;
        for (int n = 0; n < N; ++n) k_free += b_free[n] ? 1 : 0;
        if (fixed_used + req_total > budget) {
            if (k_free > 0 || fixed_used > m.beta(s) * (1.0 + 1e-9) + 1e-12)
                throw InfeasibleError("cell " + std::to_string(s) +
                                      ": bandwidth budget cannot cover minimum slices and SLAs");
        }
        const double spread = k_free > 0 ? (budget - fixed_used - req_total) / double(k_free) : 0.0;
        for (int n = 0; n < N; ++n)
            if (b_free[n]) x(2 * N * c + n) = b_req[n] + spread / m.theta(s, n);

        // Pass 2: processing rates.
        for (int n = 0; n < N; ++n) {
            const int ib = 2 * N * c + n;
            const int im = 2 * N * c + N + n;
            const double comm = m.comm_coeff(s, n) / x(ib);
            if (p.is_fixed(im)) {
                x(im) = p.fixed_values(im);
                const double t = comm + m.queue_coeff / (x(im) - m.lambda(s, n));
                if (!(t < m.sla(n)))
                    throw InfeasibleError("cell " + std::to_string(s) + " service " +
                                          std::to_string(n) + ": SLA violated at fixed allocation");
            } else {
                const double rem = m.sla(n) - comm;
                if (!(rem > 0.0))
                    throw InfeasibleError("cell " + std::to_string(s) + " service " +
                                          std::to_string(n) + ": no SLA headroom for queueing");
                x(im) = m.lambda(s, n) + m.eps_mu + 2.0 * m.queue_coeff / rem;
                free_mu.push_back({im, m.lambda(s, n), rem});
            }
            mu_total += x(im);
        }
    }

    if (p.include_gamma) {
        const double cap = 0.999 * m.gamma;
        if (mu_total >= cap) {
            // Shrink free rates toward their SLA minimum, then spread what is left.
            double min_total = mu_total;
            for (const auto& f : free_mu) {
                const double mu_min = f.lam + m.eps_mu + m.queue_coeff / (0.98 * f.rem);
                min_total += mu_min - x(f.idx);
            }
            if (min_total >= cap || free_mu.empty())
                throw InfeasibleError("fog budget cannot cover queue stability and SLAs");
            const double extra = (cap - min_total) / double(free_mu.size());
            for (const auto& f : free_mu)
                x(f.idx) = f.lam + m.eps_mu + m.queue_coeff / (0.98 * f.rem) + extra;
        } else if (!free_mu.empty()) {
            const double extra = (cap - mu_total) / double(free_mu.size());
            for (const auto& f : free_mu) x(f.idx) += extra;
        }
    }

    const auto ev = detail::eval_barrier(p, x, 1.0, false);
    if (!ev.feasible) throw InfeasibleError("phase-0 heuristic failed to produce a strict point");
    return x;
}

// Damped-Newton log-barrier path. Deterministic; no RNG anywhere.
inline BarrierResult barrier_solve(const BarrierProblem& p, const BarrierOptions& opt = {}) {
    VectorXd x = barrier_feasible_start(p);
    const int nv = p.nvar();

    // The barrier weights must be commensurate with the objective, or the
    // constraints stay invisible to Newton until the iterate hugs them
    // (prox terms can put the merit many orders above one).
    const double w_scale =
        std::max(1.0, std::abs(detail::eval_barrier(p, x, 0.0, false).phi));
    const double w_min = opt.barrier_min * w_scale;

    std::vector<int> free_idx;
    for (int i = 0; i < nv; ++i)
        if (!p.is_fixed(i)) free_idx.push_back(i);

    BarrierResult res;
    res.iterations = 0;
    if (free_idx.empty()) {
        res.x = x;
        res.converged = true;
        res.kkt_residual = 0.0;
    } else {
        int stage = 0;
        double w = opt.barrier_init * w_scale;
        bool final_stage = false;
        // Squared Newton decrement at the last final-stage iterate; bounds
        // the merit suboptimality by half its value and, unlike the gradient
        // norm, is not inflated by curvature near active constraints. It
        // carries merit units, so its test scales with the merit magnitude
        // (prox terms can push the merit far above order one).
        double decrement2 = std::numeric_limits<double>::infinity();
        double merit_scale = 1.0;
        while (true) {
            if (w <= w_min) {
                w = w_min;
                final_stage = true;
            }
            const double stage_tol = final_stage ? 0.5 * opt.tol : std::max(1e-6, 0.1 * w);
            for (int it = 0; it < opt.max_newton_per_stage; ++it) {
                auto ev = detail::eval_barrier(p, x, w, true);
                if (opt.on_iterate) opt.on_iterate(stage, it, ev.phi);
                ++res.iterations;
                if (final_stage) merit_scale = std::max(1.0, std::abs(ev.phi));

                VectorXd gf(int(free_idx.size()));
                MatrixXd Hf(int(free_idx.size()), int(free_idx.size()));
                for (size_t a = 0; a < free_idx.size(); ++a) {
                    gf(int(a)) = ev.grad(free_idx[a]);
                    for (size_t b = 0; b < free_idx.size(); ++b)
                        Hf(int(a), int(b)) = ev.hess(free_idx[a], free_idx[b]);
                }
                res.kkt_residual = gf.norm();
                if (res.kkt_residual <= stage_tol) break;

                Eigen::LDLT<MatrixXd> ldlt(Hf);
                VectorXd df = ldlt.solve(-gf);
                if (!df.allFinite() || gf.dot(df) >= 0.0) {
                    // Fall back to steepest descent if the factorization is bad.
                    df = -gf;
                } else if (final_stage) {
                    decrement2 = -gf.dot(df);
                    if (decrement2 <= opt.tol * merit_scale) break;
                }

                VectorXd dir = VectorXd::Zero(nv);
                for (size_t a = 0; a < free_idx.size(); ++a) dir(free_idx[a]) = df(int(a));

                double step = 1.0;
                const double slope = gf.dot(df);
                bool accepted = false;
                for (int ls = 0; ls < 60; ++ls) {
                    const VectorXd xt = x + step * dir;
                    const auto evt = detail::eval_barrier(p, xt, w, false);
                    if (evt.feasible && evt.phi <= ev.phi + 1e-4 * step * slope) {
                        x = xt;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) break;  // stalled at this stage
            }
            if (final_stage) break;
            w *= opt.barrier_shrink;
            ++stage;
        }
        res.x = x;
        res.converged = res.kkt_residual <= opt.tol || decrement2 <= opt.tol * merit_scale;
    }

    // Multiplier estimate for the coupling row and the bare objective.
    const ScaledModel& m = *p.model;
    if (p.include_gamma) {
        double mu_sum = 0.0;
        for (int c = 0; c < int(p.cells.size()); ++c)
            for (int n = 0; n < m.N; ++n) mu_sum += res.x(2 * m.N * c + m.N + n);
        res.gamma_multiplier = w_min / (m.gamma - mu_sum);
    }
    double obj = 0.0;
    for (int c = 0; c < int(p.cells.size()); ++c) {
        const int s = p.cells[c];
        for (int n = 0; n < m.N; ++n)
            obj += m.pair_time(s, n, res.x(2 * m.N * c + n), res.x(2 * m.N * c + m.N + n));
    }
    res.objective = obj;
    return res;
}

}  // namespace netslice
