#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace netslice {

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a feasible point does not exist (empty constraint set,
// unstable queue, failed phase-0).
struct InfeasibleError : ModelError {
    explicit InfeasibleError(const std::string& msg) : ModelError(msg) {}
};

struct ConvergenceError : ModelError {
    explicit ConvergenceError(const std::string& msg) : ModelError(msg) {}
};

// One supported service type. Task units of this service have a fixed
// payload size and a total response-time budget.
struct ServiceClass {
    int id = 0;
    double task_size_bits = 0.0;
    double latency_sla_s = 0.0;
};

// Wireless parameters and traffic statistics of one (cell, service) pair.
struct ServiceLink {
    double arrival_rate = 0.0;   // tasks/s, Poisson mean
    double channel_gain = 1.0;   // dimensionless
    double tx_power = 1.0;       // W
    double noise = 1.0;          // W
};

struct CellConfig {
    int id = 0;
    double bandwidth_budget_hz = 0.0;
    double min_slice_bandwidth_hz = 0.0;
    std::vector<ServiceLink> per_service;  // one entry per service
};

// Decision variables {b_sn, mu_sn}, stored row-major over cells.
struct AllocationMatrix {
    int S = 0, N = 0;
    std::vector<double> b;   // Hz
    std::vector<double> mu;  // tasks/s

    AllocationMatrix() = default;
    AllocationMatrix(int s, int n) : S(s), N(n), b(size_t(s) * n, 0.0), mu(size_t(s) * n, 0.0) {}

    double& bw(int s, int n) { return b[size_t(s) * N + n]; }
    double bw(int s, int n) const { return b[size_t(s) * N + n]; }
    double& rate(int s, int n) { return mu[size_t(s) * N + n]; }
    double rate(int s, int n) const { return mu[size_t(s) * N + n]; }
};

// Smallest integer m with Pr(Poisson(lambda) <= m) >= theta.
// The CDF is accumulated in log space so large rates do not underflow.
inline int poisson_quantile(double theta, double lambda) {
    if (!(theta > 0.0 && theta < 1.0))
        throw ModelError("poisson_quantile: theta must lie in (0,1)");
    if (!(lambda >= 0.0))
        throw ModelError("poisson_quantile: lambda must be nonnegative");
    if (lambda == 0.0) return 0;

    const double log_lambda = std::log(lambda);
    const int cap = int(lambda + 20.0 * std::sqrt(lambda) + 60.0);
    double cdf = 0.0;
    for (int m = 0; m <= cap; ++m) {
        const double log_pmf = -lambda + m * log_lambda - std::lgamma(double(m) + 1.0);
        cdf += std::exp(log_pmf);
        if (cdf >= theta) return m;
    }
    return cap;
}

// Full problem data. finalize() checks invariants and precomputes the
// reserved task counts theta_sn; solvers treat those as constants.
struct ProblemInstance {
    std::vector<ServiceClass> services;
    std::vector<CellConfig> cells;
    double fog_budget_tasks_per_s = 0.0;
    double confidence = 0.9;
    double eps = 1e-6;  // slack used to realize strict inequalities

    std::vector<int> theta;  // S*N reserved counts, set by finalize()

    int S() const { return int(cells.size()); }
    int N() const { return int(services.size()); }

    int reserved_count(int s, int n) const { return theta[size_t(s) * N() + n]; }

    double snr(int s, int n) const {
        const ServiceLink& l = cells[s].per_service[n];
        return l.channel_gain * l.tx_power / l.noise;
    }

    // Shannon capacity per Hz, bits/s/Hz.
    double spectral_efficiency(int s, int n) const { return std::log2(1.0 + snr(s, n)); }

    double total_arrival_rate() const {
        double sum = 0.0;
        for (const auto& c : cells)
            for (const auto& l : c.per_service) sum += l.arrival_rate;
        return sum;
    }

    void validate() const {
        if (services.empty() || cells.empty())
            throw ModelError("instance: needs at least one service and one cell");
        for (const auto& sv : services) {
            if (!(sv.task_size_bits > 0.0)) throw ModelError("service: task_size_bits must be > 0");
            if (!(sv.latency_sla_s > 0.0)) throw ModelError("service: latency_sla_s must be > 0");
        }
        for (const auto& c : cells) {
            if (!(c.bandwidth_budget_hz > 0.0))
                throw ModelError("cell: bandwidth_budget_hz must be > 0");
            if (!(c.min_slice_bandwidth_hz > 0.0 &&
                  c.min_slice_bandwidth_hz < c.bandwidth_budget_hz))
                throw ModelError("cell: need 0 < min_slice_bandwidth_hz < bandwidth_budget_hz");
            if (c.per_service.size() != services.size())
                throw ModelError("cell: per_service size must equal number of services");
            for (const auto& l : c.per_service) {
                if (!(l.arrival_rate >= 0.0)) throw ModelError("link: arrival_rate must be >= 0");
                if (!(l.noise > 0.0)) throw ModelError("link: noise must be > 0");
                if (!(l.channel_gain * l.tx_power / l.noise > 0.0))
                    throw ModelError("link: SNR must be > 0");
            }
        }
        if (!(confidence > 0.0 && confidence < 1.0))
            throw ModelError("instance: confidence must lie in (0,1)");
        if (!(fog_budget_tasks_per_s > total_arrival_rate()))
            throw ModelError("instance: fog budget must exceed the total arrival rate");
    }

    void finalize() {
        validate();
        theta.assign(size_t(S()) * N(), 1);
        for (int s = 0; s < S(); ++s)
            for (int n = 0; n < N(); ++n) {
                // Clamped to >= 1 so the per-cell budget row stays coercive
                // even for near-idle links.
                const int q = poisson_quantile(confidence, cells[s].per_service[n].arrival_rate);
                theta[size_t(s) * N() + n] = std::max(1, q);
            }
    }
};

// Airtime for one task unit over a b_hz slice.
inline double communication_delay(double d_bits, double b_hz, double gain, double power,
                                  double noise) {
    if (!(b_hz > 0.0)) throw ModelError("communication_delay: bandwidth must be > 0");
    if (!(noise > 0.0)) throw ModelError("communication_delay: noise must be > 0");
    const double snr = gain * power / noise;
    if (!(snr > 0.0)) throw ModelError("communication_delay: SNR must be > 0");
    return d_bits / (b_hz * std::log2(1.0 + snr));
}

// M/M/1 sojourn time; requires a stable queue.
inline double queuing_delay(double mu, double lambda) {
    if (!(lambda >= 0.0)) throw ModelError("queuing_delay: lambda must be >= 0");
    if (!(mu > lambda)) throw InfeasibleError("queuing_delay: mu <= lambda, queue unstable");
    return 1.0 / (mu - lambda);
}

inline double response_time(const ProblemInstance& inst, const AllocationMatrix& alloc, int s,
                            int n) {
    const ServiceLink& l = inst.cells[s].per_service[n];
    return communication_delay(inst.services[n].task_size_bits, alloc.bw(s, n), l.channel_gain,
                               l.tx_power, l.noise) +
           queuing_delay(alloc.rate(s, n), l.arrival_rate);
}

inline double total_objective(const ProblemInstance& inst, const AllocationMatrix& alloc) {
    double sum = 0.0;
    for (int s = 0; s < inst.S(); ++s)
        for (int n = 0; n < inst.N(); ++n) sum += response_time(inst, alloc, s, n);
    return sum;
}

// Per-constraint-family report; violations are magnitudes (0 when satisfied).
struct FeasibilityReport {
    struct Family {
        bool satisfied = true;
        double worst_violation = 0.0;
        int worst_s = -1, worst_n = -1;
    };
    Family min_bandwidth;     // b_sn >= b0 + eps
    Family queue_stability;   // mu_sn >= lambda_sn + eps
    Family latency_sla;       // t_sn <= Tbar_n
    Family cell_budget;       // sum_n theta_sn * b_sn <= beta_s
    Family fog_budget;        // sum_sn mu_sn <= gamma

    bool feasible() const {
        return min_bandwidth.satisfied && queue_stability.satisfied && latency_sla.satisfied &&
               cell_budget.satisfied && fog_budget.satisfied;
    }
    double worst_violation() const {
        return std::max({min_bandwidth.worst_violation, queue_stability.worst_violation,
                         latency_sla.worst_violation, cell_budget.worst_violation,
                         fog_budget.worst_violation});
    }
};

inline FeasibilityReport feasibility_check(const ProblemInstance& inst,
                                           const AllocationMatrix& alloc, double tol = 1e-9) {
    FeasibilityReport rep;
    auto record = [tol](FeasibilityReport::Family& f, double violation, int s, int n) {
        if (violation > f.worst_violation) {
            f.worst_violation = violation;
            f.worst_s = s;
            f.worst_n = n;
        }
        if (violation > tol) f.satisfied = false;
    };

    double mu_total = 0.0;
    for (int s = 0; s < inst.S(); ++s) {
        const CellConfig& cell = inst.cells[s];
        double budget_used = 0.0;
        for (int n = 0; n < inst.N(); ++n) {
            const ServiceLink& l = cell.per_service[n];
            const double b = alloc.bw(s, n);
            const double mu = alloc.rate(s, n);
            record(rep.min_bandwidth, cell.min_slice_bandwidth_hz + inst.eps - b, s, n);
            record(rep.queue_stability, l.arrival_rate + inst.eps - mu, s, n);
            double t = std::numeric_limits<double>::infinity();
            if (b > 0.0 && mu > l.arrival_rate) t = response_time(inst, alloc, s, n);
            record(rep.latency_sla, t - inst.services[n].latency_sla_s, s, n);
            budget_used += double(inst.reserved_count(s, n)) * b;
            mu_total += mu;
        }
        record(rep.cell_budget, budget_used - cell.bandwidth_budget_hz, s, -1);
    }
    record(rep.fog_budget, mu_total - inst.fog_budget_tasks_per_s, -1, -1);
    return rep;
}

}  // namespace netslice
