#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"

using namespace netslice;

namespace {

// Symmetric instance: identical cells and traffic everywhere.
ProblemInstance symmetric_instance(int S) {
    ProblemInstance inst = fixtures::tiny(1, 2);
    for (int s = 1; s < S; ++s) {
        CellConfig c = inst.cells[0];
        c.id = s;
        inst.cells.push_back(c);
    }
    inst.fog_budget_tasks_per_s = 1.6 * inst.total_arrival_rate();
    inst.finalize();
    return inst;
}

}  // namespace

TEST_CASE("central solver treats identical cells identically") {
    ProblemInstance inst = symmetric_instance(3);
    CentralResult r = centralized_solve(inst);
    CHECK(r.converged);
    for (int s = 1; s < 3; ++s)
        for (int n = 0; n < 2; ++n) {
            CHECK(r.alloc.bw(s, n) == doctest::Approx(r.alloc.bw(0, n)).epsilon(1e-6));
            CHECK(r.alloc.rate(s, n) == doctest::Approx(r.alloc.rate(0, n)).epsilon(1e-6));
        }
}

TEST_CASE("central solution beats random feasible samples") {
    ProblemInstance inst = fixtures::tiny(1, 2);
    CentralResult r = centralized_solve(inst);
    CHECK(r.converged);
    CHECK(feasibility_check(inst, r.alloc, 1e-9).feasible());

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double mu_slack = inst.fog_budget_tasks_per_s - inst.total_arrival_rate();
    int accepted = 0;
    for (int i = 0; i < 20000 && accepted < 1000; ++i) {
        AllocationMatrix a(1, 2);
        double share = u(rng);
        for (int n = 0; n < 2; ++n) {
            a.bw(0, n) = inst.cells[0].min_slice_bandwidth_hz +
                         u(rng) * inst.cells[0].bandwidth_budget_hz /
                             double(inst.reserved_count(0, n)) / 2.0;
            const double part = (n == 0 ? share : 1.0 - share) * mu_slack * u(rng);
            a.rate(0, n) = inst.cells[0].per_service[n].arrival_rate + inst.eps + part;
        }
        if (!feasibility_check(inst, a, 1e-9).feasible()) continue;
        ++accepted;
        CHECK(total_objective(inst, a) >= r.objective - 1e-9);
    }
    CHECK(accepted >= 1000);
}

TEST_CASE("central and grid oracle agree on desk-scale instances") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ProblemInstance inst = fixtures::random_instance(1, 2, seed);
        CentralResult c = centralized_solve(inst);
        OracleResult g = brute_force_oracle(inst, 24);
        CHECK(c.converged);
        // The grid point is feasible, so it can only be above the optimum.
        CHECK(g.objective >= c.objective - 1e-9);
        CHECK(std::abs(g.objective - c.objective) / c.objective < 1e-3);
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("grid oracle exhausts the fog slack in one dimension") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    OracleResult g = brute_force_oracle(inst, 48);
    const double lam = inst.cells[0].per_service[0].arrival_rate;
    const double mu_slack = inst.fog_budget_tasks_per_s - lam;
    CHECK(g.alloc.rate(0, 0) == doctest::Approx(lam + mu_slack).epsilon(1e-3));
}

TEST_CASE("grid oracle refuses large dimensions") {
    ProblemInstance inst = fixtures::tiny(2, 2);
    CHECK_THROWS_AS(brute_force_oracle(inst), ModelError);
}

TEST_CASE("proportional processing split with equal arrivals is uniform") {
    ProblemInstance inst = symmetric_instance(2);
    AllocationMatrix fixed = baseline_allocation(inst, SlicingMode::bandwidth_only);
    const double lam0 = inst.cells[0].per_service[0].arrival_rate;
    const double lam1 = inst.cells[0].per_service[1].arrival_rate;
    const double total = 2.0 * (lam0 + lam1);
    for (int s = 0; s < 2; ++s) {
        CHECK(fixed.rate(s, 0) ==
              doctest::Approx(inst.fog_budget_tasks_per_s * lam0 / total));
        CHECK(fixed.rate(s, 1) ==
              doctest::Approx(inst.fog_budget_tasks_per_s * lam1 / total));
    }
}

TEST_CASE("proportional bandwidth split follows task size and reserved counts") {
    ProblemInstance inst = fixtures::tiny(1, 2);
    inst.services[0].task_size_bits = 2400.0;
    inst.services[1].task_size_bits = 4000.0;
    // Equal arrivals give equal reserved counts, so the split is 2400:4000.
    inst.cells[0].per_service[1].arrival_rate = inst.cells[0].per_service[0].arrival_rate;
    inst.finalize();
    REQUIRE(inst.reserved_count(0, 0) == inst.reserved_count(0, 1));
    AllocationMatrix fixed = baseline_allocation(inst, SlicingMode::compute_only);
    CHECK(fixed.bw(0, 0) / fixed.bw(0, 1) == doctest::Approx(2400.0 / 4000.0));
}

TEST_CASE("baseline allocation rejects the joint mode and infeasible fixings") {
    ProblemInstance inst = fixtures::tiny(1, 2);
    CHECK_THROWS_AS(baseline_allocation(inst, SlicingMode::joint), ModelError);

    // Unbalanced arrivals make the proportional mu fall below one lambda.
    ProblemInstance bad = fixtures::tiny(1, 2);
    bad.cells[0].per_service[0].arrival_rate = 1.0;
    bad.cells[0].per_service[1].arrival_rate = 1000.0;
    bad.fog_budget_tasks_per_s = 1001.0000005;
    bad.finalize();
    CHECK_THROWS_AS(baseline_allocation(bad, SlicingMode::bandwidth_only), InfeasibleError);
}

TEST_CASE("joint slicing dominates both baselines") {
    for (std::uint64_t seed : {2ull, 9ull, 17ull}) {
        ProblemInstance inst = fixtures::random_instance(2, 2, seed);
        ModeSolveResult joint = solve_mode(inst, SlicingMode::joint);
        ModeSolveResult bw = solve_mode(inst, SlicingMode::bandwidth_only);
        ModeSolveResult cp = solve_mode(inst, SlicingMode::compute_only);
        CHECK(joint.converged);
        CHECK(bw.converged);
        CHECK(cp.converged);
        CHECK(joint.objective <= std::min(bw.objective, cp.objective) + 1e-6);
        CHECK(feasibility_check(inst, bw.alloc, 1e-6).feasible());
        CHECK(feasibility_check(inst, cp.alloc, 1e-6).feasible());
    }
}

TEST_CASE("baseline solves keep their fixed variables pinned") {
    ProblemInstance inst = fixtures::random_instance(2, 2, 5);
    AllocationMatrix fixed = baseline_allocation(inst, SlicingMode::bandwidth_only);
    ModeSolveResult r = solve_mode(inst, SlicingMode::bandwidth_only);
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n)
            CHECK(r.alloc.rate(s, n) == doctest::Approx(fixed.rate(s, n)).epsilon(1e-9));

    AllocationMatrix fixed_b = baseline_allocation(inst, SlicingMode::compute_only);
    ModeSolveResult rb = solve_mode(inst, SlicingMode::compute_only);
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n)
            CHECK(rb.alloc.bw(s, n) == doctest::Approx(fixed_b.bw(s, n)).epsilon(1e-9));
}
