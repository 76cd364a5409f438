#pragma once

#include "netslice/barrier.hpp"
#include "netslice/trace.hpp"

namespace netslice {

// Row vector of the coupling halfspace sum mu <= gamma: 1 on every
// mu-coordinate, 0 on every b-coordinate, canonical stacking order.
inline VectorXd halfspace_matrix(int S, int N) {
    VectorXd A = VectorXd::Zero(stack_dim(S, N));
    for (int s = 0; s < S; ++s)
        for (int n = 0; n < N; ++n) A(mu_index(N, s, n)) = 1.0;
    return A;
}

// Euclidean projection onto {v : A.v <= gamma}. Leaves b-coordinates
// untouched since A is zero there.
inline VectorXd project_halfspace(const VectorXd& v, const VectorXd& A, double gamma) {
    const double excess = A.dot(v) - gamma;
    if (excess <= 0.0) return v;
    return v - A * (excess / A.squaredNorm());
}

inline VectorXd z_update(const VectorXd& x, const VectorXd& lambda, const VectorXd& A,
                         double gamma) {
    return project_halfspace(x + lambda, A, gamma);
}

inline VectorXd dual_update(const VectorXd& lambda, const VectorXd& x, const VectorXd& z) {
    return lambda + x - z;
}

struct Residuals {
    double primal = 0.0;     // ||x - z||
    double dual = 0.0;       // rho * ||z - z_prev||
    double objective = 0.0;  // total objective at the projected x, seconds
};

struct SyncState {
    VectorXd x, z, z_prev, lambda;  // scaled units
    double rho = 1.0;
    int k = 0;
};

struct SyncOptions {
    double rho = 1.0;
    double eps_primal = -1.0;  // < 0: use 1e-6 * sqrt(2SN)
    double eps_dual = -1.0;
    int max_iter = 500;
    bool adapt_rho = true;  // residual-balancing x2 / /2
    BarrierOptions local;
};

struct SyncRunResult {
    AllocationMatrix alloc;
    RunTrace trace;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    FeasibilityReport feasibility;
};

struct SyncIterationStats {
    Residuals res;
    int local_iters_max = 0;
    int local_iters_sum = 0;
};

// Consensus ADMM driver: per-cell prox x-updates, halfspace-projection
// z-update, dual ascent. Operates in the scaled variable space throughout.
class AdmmSync {
  public:
    AdmmSync(const ProblemInstance& inst, SyncOptions opts = {})
        : inst_(&inst), model_(ScaledModel::build(inst)), opts_(opts),
          A_(halfspace_matrix(model_.S, model_.N)) {
        if (opts_.eps_primal < 0.0) opts_.eps_primal = 1e-6 * std::sqrt(double(model_.dim()));
        if (opts_.eps_dual < 0.0) opts_.eps_dual = 1e-6 * std::sqrt(double(model_.dim()));
    }

    const ScaledModel& model() const { return model_; }
    const VectorXd& halfspace_row() const { return A_; }
    const SyncOptions& options() const { return opts_; }

    // x0 = z0 = per-cell strictly feasible point projected into G, lambda0 = 0.
    SyncState make_state() const {
        SyncState st;
        st.rho = opts_.rho;
        st.x = VectorXd::Zero(model_.dim());
        for (int s = 0; s < model_.S; ++s) {
            BarrierProblem p = cell_problem(s);
            st.x.segment(2 * model_.N * s, 2 * model_.N) = barrier_feasible_start(p);
        }
        st.z = project_halfspace(st.x, A_, model_.gamma);
        st.z_prev = st.z;
        st.lambda = VectorXd::Zero(model_.dim());
        st.k = 0;
        return st;
    }

    // Solves the prox subproblem of one cell at the current state.
    VectorXd solve_block(const SyncState& st, int s, int* iters = nullptr) const {
        BarrierProblem p = cell_problem(s);
        p.rho = st.rho;
        p.center = st.z.segment(2 * model_.N * s, 2 * model_.N) -
                   st.lambda.segment(2 * model_.N * s, 2 * model_.N);
        try {
            BarrierResult r = barrier_solve(p, opts_.local);
            if (iters) *iters = r.iterations;
            return r.x;
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("cell " + std::to_string(s) + ": " + e.what());
        }
    }

    // z-update, dual update, residuals, optional rho adaptation.
    Residuals finish_iteration(SyncState& st, const VectorXd& x_new) const {
        st.x = x_new;
        st.z_prev = st.z;
        st.z = z_update(st.x, st.lambda, A_, model_.gamma);
        st.lambda = dual_update(st.lambda, st.x, st.z);
        st.k += 1;
        Residuals r;
        r.primal = (st.x - st.z).norm();
        r.dual = st.rho * (st.z - st.z_prev).norm();
        r.objective = model_.objective(project_halfspace(st.x, A_, model_.gamma));
        if (opts_.adapt_rho) {
            if (r.primal > 10.0 * r.dual) {
                st.rho *= 2.0;
                st.lambda *= 0.5;
            } else if (r.dual > 10.0 * r.primal) {
                st.rho *= 0.5;
                st.lambda *= 2.0;
            }
        }
        return r;
    }

    SyncIterationStats iterate(SyncState& st) const {
        VectorXd x_new(model_.dim());
        SyncIterationStats stats;
        for (int s = 0; s < model_.S; ++s) {
            int it = 0;
            x_new.segment(2 * model_.N * s, 2 * model_.N) = solve_block(st, s, &it);
            stats.local_iters_max = std::max(stats.local_iters_max, it);
            stats.local_iters_sum += it;
        }
        stats.res = finish_iteration(st, x_new);
        return stats;
    }

    SyncRunResult run() const {
        SyncState st = make_state();
        SyncRunResult out;
        double elapsed = 0.0;
        while (st.k < opts_.max_iter) {
            SyncIterationStats stats = iterate(st);
            elapsed += double(stats.local_iters_sum);
            out.trace.rows.push_back({st.k, stats.res.primal, stats.res.dual,
                                      stats.res.objective, double(stats.local_iters_max),
                                      elapsed});
            if (stats.res.primal <= opts_.eps_primal && stats.res.dual <= opts_.eps_dual) {
                out.converged = true;
                break;
            }
        }
        out.iterations = st.k;
        out.alloc = model_.to_allocation(st.z);
        out.objective = model_.objective(st.z);
        out.feasibility = feasibility_check(*inst_, out.alloc, 1e-6);
        return out;
    }

  private:
    BarrierProblem cell_problem(int s) const {
        BarrierProblem p;
        p.model = &model_;
        p.cells = {s};
        return p;
    }

    const ProblemInstance* inst_;
    ScaledModel model_;
    SyncOptions opts_;
    VectorXd A_;
};

}  // namespace netslice
