#pragma once

#include <Eigen/Dense>

#include "netslice/model.hpp"

namespace netslice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Stacking order of the decision vector: cells outer, services inner,
// b-block then mu-block per cell. Cell s owns coordinates
// [2N*s, 2N*(s+1)); b_sn sits at 2N*s+n and mu_sn at 2N*s+N+n.
inline int stack_dim(int S, int N) { return 2 * S * N; }
inline int b_index(int N, int s, int n) { return 2 * N * s + n; }
inline int mu_index(int N, int s, int n) { return 2 * N * s + N + n; }

// Internally normalized copy of a ProblemInstance. Bandwidths are measured
// in units of b_scale, processing rates in units of mu_scale, and delays in
// units of t_scale, so solver iterates, gradients and curvatures all stay
// O(1) regardless of the instance's natural magnitudes. pair_time and
// objective convert back to seconds:
//   t_sn = t_scale * (comm_coeff(s,n) / b~ + queue_coeff / (mu~ - lambda)).
struct ScaledModel {
    int S = 0, N = 0;
    double b_scale = 1.0, mu_scale = 1.0, t_scale = 1.0;

    MatrixXd comm_coeff;  // S x N, d_n / log2(1+snr) / b_scale  [s * scaled-Hz]
    MatrixXd lambda;      // S x N, arrival rates / mu_scale
    MatrixXd theta;       // S x N, reserved counts (dimensionless)
    VectorXd sla;         // N, per-service response-time budget [s]
    VectorXd beta;        // S, cell bandwidth budgets / b_scale
    VectorXd b_floor;     // S, min slice bandwidth / b_scale
    double gamma = 0.0;   // fog budget / mu_scale
    double queue_coeff = 1.0;  // 1 / mu_scale
    double eps_b = 0.0, eps_mu = 0.0;  // strict-inequality slack, scaled

    int dim() const { return stack_dim(S, N); }
    int bi(int s, int n) const { return b_index(N, s, n); }
    int mi(int s, int n) const { return mu_index(N, s, n); }

    static ScaledModel build(const ProblemInstance& inst, bool normalize = true) {
        ScaledModel m;
        m.S = inst.S();
        m.N = inst.N();
        if (normalize) {
            double acc = 0.0;
            for (int s = 0; s < m.S; ++s) {
                double th = 0.0;
                for (int n = 0; n < m.N; ++n) th += double(inst.reserved_count(s, n));
                acc += inst.cells[s].bandwidth_budget_hz / th;
            }
            m.b_scale = acc / double(m.S);
            m.mu_scale = inst.fog_budget_tasks_per_s / double(m.S * m.N);
        }
        m.comm_coeff.resize(m.S, m.N);
        m.lambda.resize(m.S, m.N);
        m.theta.resize(m.S, m.N);
        m.sla.resize(m.N);
        m.beta.resize(m.S);
        m.b_floor.resize(m.S);
        for (int n = 0; n < m.N; ++n) m.sla(n) = inst.services[n].latency_sla_s;
        for (int s = 0; s < m.S; ++s) {
            m.beta(s) = inst.cells[s].bandwidth_budget_hz / m.b_scale;
            m.b_floor(s) = inst.cells[s].min_slice_bandwidth_hz / m.b_scale;
            for (int n = 0; n < m.N; ++n) {
                m.comm_coeff(s, n) = inst.services[n].task_size_bits /
                                     inst.spectral_efficiency(s, n) / m.b_scale;
                m.lambda(s, n) = inst.cells[s].per_service[n].arrival_rate / m.mu_scale;
                m.theta(s, n) = double(inst.reserved_count(s, n));
            }
        }
        m.gamma = inst.fog_budget_tasks_per_s / m.mu_scale;
        m.queue_coeff = 1.0 / m.mu_scale;
        m.eps_b = inst.eps / m.b_scale;
        m.eps_mu = inst.eps / m.mu_scale;
        if (normalize) {
            // Geometric mean of the objective curvatures at a nominal
            // interior point (theta-weighted even bandwidth split, even fog
            // headroom); dividing by it puts the Hessian near identity so a
            // unit prox weight is well conditioned.
            const double mu_head = (m.gamma - m.lambda.sum()) / double(m.S * m.N);
            double acc = 0.0;
            for (int s = 0; s < m.S; ++s) {
                const double b_nom = m.beta(s) / m.theta.row(s).sum();
                for (int n = 0; n < m.N; ++n)
                    acc += std::log(2.0 * m.comm_coeff(s, n) / (b_nom * b_nom * b_nom)) +
                           std::log(2.0 * m.queue_coeff / (mu_head * mu_head * mu_head));
            }
            m.t_scale = std::exp(acc / double(2 * m.S * m.N));
            m.comm_coeff /= m.t_scale;
            m.queue_coeff /= m.t_scale;
            m.sla /= m.t_scale;
        }
        return m;
    }

    // Response time of pair (s,n) in seconds; +inf outside the open domain.
    double pair_time(int s, int n, double b, double mu) const {
        if (!(b > 0.0) || !(mu > lambda(s, n))) return std::numeric_limits<double>::infinity();
        return t_scale * (comm_coeff(s, n) / b + queue_coeff / (mu - lambda(s, n)));
    }

    // Total objective [s] of a full stacked vector; +inf outside the domain.
    double objective(const VectorXd& x) const {
        double sum = 0.0;
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                sum += pair_time(s, n, x(bi(s, n)), x(mi(s, n)));
                if (!std::isfinite(sum)) return std::numeric_limits<double>::infinity();
            }
        return sum;
    }

    AllocationMatrix to_allocation(const VectorXd& x) const {
        AllocationMatrix a(S, N);
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                a.bw(s, n) = x(bi(s, n)) * b_scale;
                a.rate(s, n) = x(mi(s, n)) * mu_scale;
            }
        return a;
    }

    VectorXd from_allocation(const AllocationMatrix& a) const {
        VectorXd x(dim());
        for (int s = 0; s < S; ++s)
            for (int n = 0; n < N; ++n) {
                x(bi(s, n)) = a.bw(s, n) / b_scale;
                x(mi(s, n)) = a.rate(s, n) / mu_scale;
            }
        return x;
    }
};

}  // namespace netslice
