#pragma once

#include <random>

#include "netslice/netslice.hpp"

namespace fixtures {

using namespace netslice;

// Deterministic hand-built instance, S cells x N services, generous budgets.
// Small enough for grid oracles at S=N=1 and cheap ADMM runs at 2x2.
inline ProblemInstance tiny(int S, int N) {
    ProblemInstance inst;
    for (int n = 0; n < N; ++n) {
        ServiceClass sv;
        sv.id = n;
        sv.task_size_bits = 2400.0 + 1600.0 * n;
        sv.latency_sla_s = 0.5 - 0.2 * n;
        inst.services.push_back(sv);
    }
    for (int s = 0; s < S; ++s) {
        CellConfig c;
        c.id = s;
        c.bandwidth_budget_hz = 4e6 + 1e6 * s;
        c.min_slice_bandwidth_hz = 1e3;
        for (int n = 0; n < N; ++n) {
            ServiceLink l;
            l.arrival_rate = 80.0 + 40.0 * n + 10.0 * s;
            l.channel_gain = 255.0;
            c.per_service.push_back(l);
        }
        inst.cells.push_back(c);
    }
    inst.fog_budget_tasks_per_s = 1.6 * inst.total_arrival_rate();
    inst.confidence = 0.9;
    inst.finalize();
    return inst;
}

// Random feasible instance; traffic, budgets and channels drawn from wide
// but safe ranges (SLAs always reachable at the budget corners).
inline ProblemInstance random_instance(int S, int N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProblemInstance inst;
    for (int n = 0; n < N; ++n) {
        ServiceClass sv;
        sv.id = n;
        sv.task_size_bits = 1000.0 + 4000.0 * u(rng);
        sv.latency_sla_s = 0.2 + 0.5 * u(rng);
        inst.services.push_back(sv);
    }
    for (int s = 0; s < S; ++s) {
        CellConfig c;
        c.id = s;
        c.bandwidth_budget_hz = 3e6 * (1.0 + u(rng));
        c.min_slice_bandwidth_hz = 1e3;
        for (int n = 0; n < N; ++n) {
            ServiceLink l;
            l.arrival_rate = 50.0 + 150.0 * u(rng);
            l.channel_gain = 100.0 + 900.0 * u(rng);
            c.per_service.push_back(l);
        }
        inst.cells.push_back(c);
    }
    inst.fog_budget_tasks_per_s = (1.5 + u(rng)) * inst.total_arrival_rate();
    inst.confidence = 0.9;
    inst.finalize();
    return inst;
}

// Campus-style 10-cell scenario used by races and trend sweeps.
inline ProblemInstance table_scenario(std::uint64_t seed = 1) {
    ScenarioSpec spec;
    spec.seed = seed;
    return generate_scenario(spec);
}

// Divergence-study fixture: moderate fog headroom, so the coupling row is
// contested, paired with strongly heterogeneous solve times.
inline ProblemInstance stress_instance() {
    ScenarioSpec spec;
    spec.num_cells = 8;
    spec.seed = 1;
    ProblemInstance inst = generate_scenario(spec);
    inst.fog_budget_tasks_per_s = 2.0 * inst.total_arrival_rate();
    inst.finalize();
    return inst;
}

inline TimingModel stress_timing(std::uint64_t seed) {
    TimingModel t = TimingModel::homogeneous(8, 1.0, seed);
    for (int s = 0; s < 8; ++s) t.mean_compute(s) = 0.1 + 3.9 * double(s) / 7.0;
    return t;
}

}  // namespace fixtures
