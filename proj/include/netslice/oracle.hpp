#pragma once

#include "netslice/barrier.hpp"

namespace netslice {

enum class SlicingMode { joint, bandwidth_only, compute_only };

inline const char* to_string(SlicingMode m) {
    switch (m) {
        case SlicingMode::joint: return "joint";
        case SlicingMode::bandwidth_only: return "bandwidth_only";
        case SlicingMode::compute_only: return "compute_only";
    }
    return "?";
}

struct CentralResult {
    AllocationMatrix alloc;
    double objective = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    // Multiplier of the fog-budget row, natural units and in the solver's
    // scaled units (used to seed warm starts of the distributed drivers).
    double gamma_multiplier = 0.0;
    double gamma_multiplier_scaled = 0.0;
};

// Reference interior-point solve of the joint problem over all cells.
inline CentralResult centralized_solve(const ProblemInstance& inst, BarrierOptions opt = {}) {
    ScaledModel m = ScaledModel::build(inst);
    BarrierProblem p;
    p.model = &m;
    p.cells.resize(size_t(inst.S()));
    for (int s = 0; s < inst.S(); ++s) p.cells[size_t(s)] = s;
    p.include_gamma = true;

    BarrierResult r = barrier_solve(p, opt);
    CentralResult out;
    out.alloc = m.to_allocation(r.x);
    out.objective = r.objective;
    out.kkt_residual = r.kkt_residual;
    out.converged = r.converged;
    out.gamma_multiplier_scaled = r.gamma_multiplier;
    out.gamma_multiplier = r.gamma_multiplier * m.t_scale / m.mu_scale;
    return out;
}

struct OracleResult {
    AllocationMatrix alloc;
    double objective = std::numeric_limits<double>::infinity();
};

// Exhaustive grid search over the feasible box, refined twice around the
// incumbent. Desk-scale only: 2SN <= 6.
inline OracleResult brute_force_oracle(const ProblemInstance& inst, int grid_resolution = 24) {
    const int S = inst.S(), N = inst.N();
    const int dim = 2 * S * N;
    if (dim > 6) throw ModelError("brute_force_oracle: dimension 2SN must be <= 6");
    if (grid_resolution < 3) throw ModelError("brute_force_oracle: resolution too small");

    const double mu_slack = inst.fog_budget_tasks_per_s - inst.total_arrival_rate();
    std::vector<double> lo(dim), hi(dim);
    for (int s = 0; s < S; ++s)
        for (int n = 0; n < N; ++n) {
            const int ib = b_index(N, s, n), im = mu_index(N, s, n);
            lo[ib] = inst.cells[s].min_slice_bandwidth_hz + inst.eps;
            hi[ib] = inst.cells[s].bandwidth_budget_hz / double(inst.reserved_count(s, n));
            const double lam = inst.cells[s].per_service[n].arrival_rate;
            lo[im] = lam + inst.eps + 1e-9 * std::max(1.0, mu_slack);
            hi[im] = lam + mu_slack;
        }

    auto evaluate = [&](const std::vector<double>& x) {
        AllocationMatrix a(S, N);
        double mu_total = 0.0;
        for (int s = 0; s < S; ++s) {
            double budget = 0.0;
            for (int n = 0; n < N; ++n) {
                a.bw(s, n) = x[size_t(b_index(N, s, n))];
                a.rate(s, n) = x[size_t(mu_index(N, s, n))];
                budget += double(inst.reserved_count(s, n)) * a.bw(s, n);
                mu_total += a.rate(s, n);
            }
            if (budget > inst.cells[s].bandwidth_budget_hz)
                return std::numeric_limits<double>::infinity();
        }
        if (mu_total > inst.fog_budget_tasks_per_s) return std::numeric_limits<double>::infinity();
        double obj = 0.0;
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                const double t = response_time(inst, a, s, n);
                if (t > inst.services[n].latency_sla_s)
                    return std::numeric_limits<double>::infinity();
                obj += t;
            }
        return obj;
    };

    OracleResult best;
    std::vector<double> best_x;
    auto consider = [&](const std::vector<double>& x) {
        const double obj = evaluate(x);
        if (obj < best.objective) {
            best.objective = obj;
            best_x = x;
        }
    };
    // The optimum typically sits on the budget rows, which plain grid points
    // stop O(h) short of; also try each point with one coordinate pushed up
    // until its row is tight. Bandwidth and fog saturations touch disjoint
    // coordinates, so the combinations cover pairs of active rows.
    auto with_mu_saturations = [&](const std::vector<double>& x) {
        consider(x);
        double mu_sum = 0.0;
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) mu_sum += x[size_t(mu_index(N, s, n))];
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                const int im = mu_index(N, s, n);
                const double v =
                    (inst.fog_budget_tasks_per_s - (mu_sum - x[size_t(im)])) * (1.0 - 1e-12);
                if (v > x[size_t(im)] && v >= lo[size_t(im)]) {
                    std::vector<double> y = x;
                    y[size_t(im)] = v;
                    consider(y);
                }
            }
    };
    auto consider_with_saturations = [&](const std::vector<double>& x) {
        with_mu_saturations(x);
        for (int s = 0; s < S; ++s) {
            double used = 0.0;
            for (int n = 0; n < N; ++n)
                used += double(inst.reserved_count(s, n)) * x[size_t(b_index(N, s, n))];
            for (int n = 0; n < N; ++n) {
                const int ib = b_index(N, s, n);
                const double theta = double(inst.reserved_count(s, n));
                const double v = (inst.cells[s].bandwidth_budget_hz -
                                  (used - theta * x[size_t(ib)])) /
                                 theta * (1.0 - 1e-12);
                if (v > x[size_t(ib)]) {
                    std::vector<double> y = x;
                    y[size_t(ib)] = v;
                    with_mu_saturations(y);
                }
            }
        }
    };
    auto sweep = [&](const std::vector<double>& l, const std::vector<double>& h) {
        std::vector<int> idx(size_t(dim), 0);
        std::vector<double> x(size_t(dim), 0.0);
        while (true) {
            for (int d = 0; d < dim; ++d)
                x[size_t(d)] =
                    l[size_t(d)] + (h[size_t(d)] - l[size_t(d)]) * double(idx[size_t(d)]) /
                                       double(grid_resolution - 1);
            consider_with_saturations(x);
            int d = 0;
            while (d < dim && ++idx[size_t(d)] == grid_resolution) {
                idx[size_t(d)] = 0;
                ++d;
            }
            if (d == dim) break;
        }
    };

    sweep(lo, hi);
    if (best_x.empty()) throw InfeasibleError("brute_force_oracle: no feasible grid point");
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> l(size_t(dim), 0.0), h(size_t(dim), 0.0);
        for (int d = 0; d < dim; ++d) {
            const double cell_w = (hi[size_t(d)] - lo[size_t(d)]);
            const double w = cell_w * std::pow(2.0 / double(grid_resolution - 1), pass + 1);
            l[size_t(d)] = std::max(lo[size_t(d)], best_x[size_t(d)] - w);
            h[size_t(d)] = std::min(hi[size_t(d)], best_x[size_t(d)] + w);
        }
        sweep(l, h);
    }

    best.alloc = AllocationMatrix(S, N);
    for (int s = 0; s < S; ++s)
        for (int n = 0; n < N; ++n) {
            best.alloc.bw(s, n) = best_x[size_t(b_index(N, s, n))];
            best.alloc.rate(s, n) = best_x[size_t(mu_index(N, s, n))];
        }
    return best;
}

// Fixed part of a single-resource baseline. bandwidth_only pins mu
// proportional to the arrival rates; compute_only pins b proportional to
// d_n * theta_sn, normalized so each cell's budget row holds with equality.
inline AllocationMatrix baseline_allocation(const ProblemInstance& inst, SlicingMode mode) {
    if (mode == SlicingMode::joint)
        throw ModelError("baseline_allocation: mode must fix one resource");
    const int S = inst.S(), N = inst.N();
    AllocationMatrix a(S, N);
    if (mode == SlicingMode::bandwidth_only) {
        const double lam_total = inst.total_arrival_rate();
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                const double lam = inst.cells[s].per_service[n].arrival_rate;
                a.rate(s, n) = inst.fog_budget_tasks_per_s * lam / lam_total;
                if (!(a.rate(s, n) > lam + inst.eps))
                    throw InfeasibleError("bandwidth_only: proportional mu <= lambda at cell " +
                                          std::to_string(s) + " service " + std::to_string(n));
            }
    } else {
        for (int s = 0; s < S; ++s) {
            double denom = 0.0;
            for (int n = 0; n < N; ++n) {
                const double w = inst.services[n].task_size_bits * inst.reserved_count(s, n);
                denom += double(inst.reserved_count(s, n)) * w;
            }
            for (int n = 0; n < N; ++n) {
                const double w = inst.services[n].task_size_bits * inst.reserved_count(s, n);
                a.bw(s, n) = inst.cells[s].bandwidth_budget_hz * w / denom;
                if (!(a.bw(s, n) > inst.cells[s].min_slice_bandwidth_hz + inst.eps))
                    throw InfeasibleError("compute_only: proportional b <= b0 at cell " +
                                          std::to_string(s) + " service " + std::to_string(n));
            }
        }
    }
    return a;
}

struct ModeSolveResult {
    AllocationMatrix alloc;
    double objective = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
};

// Solves a slicing mode: joint delegates to centralized_solve, the
// baselines optimize only their free variables with the same machinery.
inline ModeSolveResult solve_mode(const ProblemInstance& inst, SlicingMode mode,
                                  BarrierOptions opt = {}) {
    if (mode == SlicingMode::joint) {
        CentralResult c = centralized_solve(inst, opt);
        return {c.alloc, c.objective, c.kkt_residual, c.converged};
    }
    const AllocationMatrix fixed_part = baseline_allocation(inst, mode);
    ScaledModel m = ScaledModel::build(inst);
    BarrierProblem p;
    p.model = &m;
    p.cells.resize(size_t(inst.S()));
    for (int s = 0; s < inst.S(); ++s) p.cells[size_t(s)] = s;
    p.include_gamma = (mode == SlicingMode::compute_only);
    p.fixed.assign(size_t(m.dim()), 0);
    p.fixed_values = VectorXd::Zero(m.dim());
    const VectorXd fv = m.from_allocation(fixed_part);
    for (int s = 0; s < inst.S(); ++s)
        for (int n = 0; n < inst.N(); ++n) {
            const int i = (mode == SlicingMode::bandwidth_only) ? m.mi(s, n) : m.bi(s, n);
            p.fixed[size_t(i)] = 1;
            p.fixed_values(i) = fv(i);
        }

    BarrierResult r = barrier_solve(p, opt);
    return {m.to_allocation(r.x), r.objective, r.kkt_residual, r.converged};
}

}  // namespace netslice
