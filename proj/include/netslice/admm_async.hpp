#pragma once

#include <deque>
#include <random>

#include "netslice/admm_sync.hpp"

namespace netslice {

// --- block kernels of the Douglas-Rachford splitting on the dual ---------

// Closed-form z block of  argmin_z I_G(z) + z.v + (rho/2)||z||^2.
// Unconstrained minimizer is -v/rho; the active branch is the KKT solution
// on A.z = gamma. Needs the global scalar A.v from the same snapshot.
inline VectorXd z_block_closed_form(const VectorXd& v_hat, const VectorXd& A, double gamma,
                                    double rho, int block, int N) {
    const double Av = A.dot(v_hat);
    VectorXd z = -v_hat.segment(2 * N * block, 2 * N) / rho;
    if (-Av / rho > gamma) {
        const double corr = (Av + rho * gamma) / (rho * A.squaredNorm());
        z += corr * A.segment(2 * N * block, 2 * N);
    }
    return z;
}

inline VectorXd lambda_ig_block(const VectorXd& v_hat, const VectorXd& z_hat_block, double rho,
                                int block, int N) {
    return v_hat.segment(2 * N * block, 2 * N) + rho * z_hat_block;
}

struct AsyncState {
    VectorXd V;                  // global memory, scaled units
    std::vector<long> version;   // per-block update counters
    double alpha = 0.5;
    double rho = 1.0;
    long k = 0;
};

struct BlockUpdate {
    int block = 0;
    VectorXd delta;  // alpha * (Lambda_IG - Lambda_F) restricted to the block
    std::vector<long> based_on_version;
};

inline void apply_block_update(AsyncState& st, const BlockUpdate& u, int N) {
    st.V.segment(2 * N * u.block, 2 * N) -= u.delta;
    st.version[size_t(u.block)] += 1;
    st.k += 1;
}

// --- staleness / activation configuration --------------------------------

enum class StalenessKind { fresh, uniform, geometric };

struct StalenessModel {
    StalenessKind kind = StalenessKind::uniform;
    int tau = 5;          // bound on snapshot age, in global updates
    double geom_p = 0.5;  // success probability of the geometric delays
};

struct AsyncOptions {
    double rho = 1.0;
    double alpha = 0.5;
    int max_updates = 20000;
    double fp_tol = -1.0;  // < 0: use 1e-6 * sqrt(2SN)
    StalenessModel staleness;
    VectorXd activation;  // per-block probabilities; empty = uniform 1/S
    std::uint64_t seed = 0;
    BarrierOptions local;
};

struct AsyncRecord {
    long k = 0;
    int block = 0;
    int staleness_age = 0;  // max block age of the snapshot used
    double fp_residual = std::numeric_limits<double>::quiet_NaN();  // sampled every S updates
    double objective = std::numeric_limits<double>::quiet_NaN();
};

struct AsyncTrace {
    std::vector<AsyncRecord> rows;

    static const char* csv_header() {
        return "k,active_block,staleness_age,fixed_point_residual,objective";
    }
    void write_csv(std::ostream& os) const {
        os << csv_header() << '\n';
        for (const auto& r : rows) {
            os << r.k << ',' << r.block << ',' << r.staleness_age << ',';
            if (std::isfinite(r.fp_residual)) os << r.fp_residual;
            os << ',';
            if (std::isfinite(r.objective)) os << r.objective;
            os << '\n';
        }
    }
};

struct AsyncRunResult {
    AllocationMatrix alloc;
    AsyncTrace trace;
    bool converged = false;
    long updates = 0;
    double objective = 0.0;
    double fp_residual = 0.0;
    FeasibilityReport feasibility;
};

// AsyncADMM driver: randomized block updates of the global memory V through
// the DRS operator, tolerating snapshots of bounded age. The reference
// implementation simulates asynchrony deterministically from a seed.
class AdmmAsync {
  public:
    AdmmAsync(const ProblemInstance& inst, AsyncOptions opts = {})
        : inst_(&inst), model_(ScaledModel::build(inst)), opts_(opts),
          A_(halfspace_matrix(model_.S, model_.N)) {
        if (opts_.fp_tol < 0.0) opts_.fp_tol = 1e-6 * std::sqrt(double(model_.dim()));
        if (opts_.activation.size() == 0)
            opts_.activation = VectorXd::Constant(model_.S, 1.0 / double(model_.S));
    }

    const ScaledModel& model() const { return model_; }
    const VectorXd& halfspace_row() const { return A_; }
    const AsyncOptions& options() const { return opts_; }

    AsyncState make_state() const {
        AsyncState st;
        st.V = VectorXd::Zero(model_.dim());
        st.version.assign(size_t(model_.S), 0);
        st.alpha = opts_.alpha;
        st.rho = opts_.rho;
        return st;
    }

    // x-prox of one block plus the conjugate-side dual estimate.
    std::pair<VectorXd, VectorXd> x_block_solve(const VectorXd& v_hat,
                                                const VectorXd& lam_ig_block, int block) const {
        const int N = model_.N;
        const VectorXd v_blk = v_hat.segment(2 * N * block, 2 * N);
        BarrierProblem p;
        p.model = &model_;
        p.cells = {block};
        p.rho = opts_.rho;
        p.center = (2.0 * lam_ig_block - v_blk) / opts_.rho;
        BarrierResult r = barrier_solve(p, opts_.local);
        VectorXd lam_f = 2.0 * lam_ig_block - v_blk - opts_.rho * r.x;
        return {r.x, lam_f};
    }

    // One DRS block update computed from an arbitrary snapshot v_hat.
    BlockUpdate compute_update(const VectorXd& v_hat, int block) const {
        const VectorXd z = z_block_closed_form(v_hat, A_, model_.gamma, opts_.rho, block, model_.N);
        const VectorXd lam_ig = lambda_ig_block(v_hat, z, opts_.rho, block, model_.N);
        auto [x, lam_f] = x_block_solve(v_hat, lam_ig, block);
        BlockUpdate u;
        u.block = block;
        u.delta = opts_.alpha * (lam_ig - lam_f);
        return u;
    }

    // Full fresh DRS map V -> M_DRS(V). The fixed-point residual is
    // ||V - M_DRS(V)|| = ||Lambda_IG - Lambda_F||.
    VectorXd drs_map(const VectorXd& V) const {
        const int N = model_.N;
        VectorXd out = V;
        for (int s = 0; s < model_.S; ++s) {
            const VectorXd z = z_block_closed_form(V, A_, model_.gamma, opts_.rho, s, N);
            const VectorXd lam_ig = lambda_ig_block(V, z, opts_.rho, s, N);
            auto [x, lam_f] = x_block_solve(V, lam_ig, s);
            out.segment(2 * N * s, 2 * N) -= (lam_ig - lam_f);
        }
        return out;
    }

    double fixed_point_residual(const VectorXd& V) const { return (V - drs_map(V)).norm(); }

    // Primal recovery from a fresh snapshot: per-block x-prox, then
    // projection onto the coupling halfspace.
    VectorXd recover_primal_scaled(const VectorXd& V) const {
        const int N = model_.N;
        VectorXd x(model_.dim());
        for (int s = 0; s < model_.S; ++s) {
            const VectorXd z = z_block_closed_form(V, A_, model_.gamma, opts_.rho, s, N);
            const VectorXd lam_ig = lambda_ig_block(V, z, opts_.rho, s, N);
            x.segment(2 * N * s, 2 * N) = x_block_solve(V, lam_ig, s).first;
        }
        return project_halfspace(x, A_, model_.gamma);
    }

    AllocationMatrix recover_primal(const VectorXd& V) const {
        return model_.to_allocation(recover_primal_scaled(V));
    }

    AsyncRunResult run() const {
        AsyncState st = make_state();
        std::mt19937_64 rng(opts_.seed);
        std::discrete_distribution<int> pick(opts_.activation.data(),
                                             opts_.activation.data() + opts_.activation.size());

        // History ring for modeled staleness; front() is the current V.
        const int tau = std::max(0, opts_.staleness.tau);
        std::deque<VectorXd> history;
        history.push_front(st.V);

        AsyncRunResult out;
        while (st.k < opts_.max_updates) {
            const int block = pick(rng);
            int max_age = 0;
            VectorXd v_hat = st.V;
            if (opts_.staleness.kind != StalenessKind::fresh && tau > 0) {
                const int cap = std::min<long>(tau, st.k);
                for (int s = 0; s < model_.S; ++s) {
                    int age = 0;
                    if (cap > 0) {
                        if (opts_.staleness.kind == StalenessKind::uniform) {
                            age = std::uniform_int_distribution<int>(0, cap)(rng);
                        } else {
                            std::geometric_distribution<int> g(opts_.staleness.geom_p);
                            age = std::min(g(rng), cap);
                        }
                    }
                    max_age = std::max(max_age, age);
                    v_hat.segment(2 * model_.N * s, 2 * model_.N) =
                        history[size_t(age)].segment(2 * model_.N * s, 2 * model_.N);
                }
            }

            BlockUpdate u = compute_update(v_hat, block);
            apply_block_update(st, u, model_.N);
            history.push_front(st.V);
            while (int(history.size()) > tau + 1) history.pop_back();

            AsyncRecord rec;
            rec.k = st.k;
            rec.block = block;
            rec.staleness_age = max_age;
            if (st.k % model_.S == 0) {
                rec.fp_residual = fixed_point_residual(st.V);
                rec.objective = model_.objective(recover_primal_scaled(st.V));
                out.fp_residual = rec.fp_residual;
            }
            out.trace.rows.push_back(rec);
            if (std::isfinite(rec.fp_residual) && rec.fp_residual <= opts_.fp_tol) {
                out.converged = true;
                break;
            }
        }
        out.updates = st.k;
        const VectorXd x = recover_primal_scaled(st.V);
        out.alloc = model_.to_allocation(x);
        out.objective = model_.objective(x);
        out.feasibility = feasibility_check(*inst_, out.alloc, 1e-6);
        return out;
    }

  private:
    const ProblemInstance* inst_;
    ScaledModel model_;
    AsyncOptions opts_;
    VectorXd A_;
};

// Directly-asynchronized synchronous iteration, no damping: each cell runs
// the full round it believes it is part of against its stale snapshot of
// the globals, then submits its dual increment, which the orchestrator
// applies additively. Concurrent increments double-count the shared
// coupling correction, so the dual over-integrates and consensus is never
// reached. Kept for the divergence study; the event schedule is supplied by
// the caller.
class NaiveAsyncRule {
  public:
    struct Snapshot {
        VectorXd x, z, lambda;
    };

    explicit NaiveAsyncRule(const AdmmSync& sync) : sync_(&sync), st_(sync.make_state()) {}

    const SyncState& state() const { return st_; }
    Snapshot snapshot() const { return {st_.x, st_.z, st_.lambda}; }

    // One naive event: cell `block` solves its prox against the snapshot,
    // finishes the z/dual round from its own view, and its dual increment
    // lands additively on the shared dual. Returns the primal residual.
    double step(int block, const Snapshot& snap) {
        const ScaledModel& m = sync_->model();
        const int N = m.N;
        SyncState probe = st_;
        probe.z = snap.z;
        probe.lambda = snap.lambda;
        const VectorXd xs = sync_->solve_block(probe, block);
        st_.x.segment(2 * N * block, 2 * N) = xs;

        VectorXd x_hat = snap.x;
        x_hat.segment(2 * N * block, 2 * N) = xs;
        const VectorXd z_hat = z_update(x_hat, snap.lambda, sync_->halfspace_row(), m.gamma);
        st_.lambda += x_hat - z_hat;  // increment from the stale view

        st_.z_prev = st_.z;
        st_.z = z_update(st_.x, st_.lambda, sync_->halfspace_row(), m.gamma);
        st_.k += 1;
        return (st_.x - st_.z).norm();
    }

  private:
    const AdmmSync* sync_;
    SyncState st_;
};

}  // namespace netslice
