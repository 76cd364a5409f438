#pragma once

#include "netslice/barrier.hpp"

namespace netslice {

// Per-BS prox subproblem in the instance's natural units:
//   min f_s(x) + (rho/2)||x - center||^2  over  x = (b_s., mu_s.) in G_s.
struct LocalProblem {
    const ProblemInstance* instance = nullptr;
    int cell = 0;
    double rho = 1.0;
    VectorXd center;  // length 2N: b-block then mu-block
};

struct LocalSolution {
    VectorXd x;  // length 2N
    double kkt_residual = 0.0;
    int iterations = 0;
};

// Carries the best iterate when the Newton path stalls above tolerance.
struct LocalNonConvergence : ConvergenceError {
    LocalSolution best;
    LocalNonConvergence(const std::string& msg, LocalSolution b)
        : ConvergenceError(msg), best(std::move(b)) {}
};

// Analytic gradient of f_s(x) + (rho/2)||x-center||^2 at a strictly
// interior point, natural units.
inline VectorXd local_objective_gradient(const LocalProblem& lp, const VectorXd& x) {
    const ProblemInstance& inst = *lp.instance;
    const int N = inst.N();
    const int s = lp.cell;
    VectorXd g(2 * N);
    for (int n = 0; n < N; ++n) {
        const double b = x(n);
        const double mu = x(N + n);
        const double lam = inst.cells[s].per_service[n].arrival_rate;
        if (!(b > 0.0) || !(mu > lam))
            throw ModelError("local_objective_gradient: point is not interior");
        const double d = inst.services[n].task_size_bits;
        g(n) = -d / (b * b * inst.spectral_efficiency(s, n));
        g(N + n) = -1.0 / ((mu - lam) * (mu - lam));
    }
    g += lp.rho * (x - lp.center);
    return g;
}

inline LocalSolution local_prox(const LocalProblem& lp, const BarrierOptions& opt = {}) {
    if (!(lp.rho > 0.0)) throw ModelError("local_prox: rho must be > 0");
    if (lp.center.size() != 2 * lp.instance->N())
        throw ModelError("local_prox: center must have length 2N");

    // Identity scaling keeps the prox metric in natural units.
    ScaledModel m = ScaledModel::build(*lp.instance, /*normalize=*/false);
    BarrierProblem p;
    p.model = &m;
    p.cells = {lp.cell};
    p.rho = lp.rho;
    p.center = lp.center;

    BarrierResult r = barrier_solve(p, opt);
    LocalSolution sol{r.x, r.kkt_residual, r.iterations};
    if (!r.converged)
        throw LocalNonConvergence("local_prox: Newton path stalled at residual " +
                                      std::to_string(r.kkt_residual),
                                  sol);
    return sol;
}

}  // namespace netslice
