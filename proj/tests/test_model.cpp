#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"

using namespace netslice;

TEST_CASE("communication delay evaluates the capacity formula") {
    CHECK(communication_delay(1.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(communication_delay(4000.0, 1e6, 3.0, 1.0, 1.0) == doctest::Approx(2.0e-3));
    CHECK(communication_delay(2400.0, 1e6, 1.0, 1.0, 1.0) == doctest::Approx(2.4e-3));
}

TEST_CASE("communication delay rejects bad domains") {
    CHECK_THROWS_AS(communication_delay(1.0, 0.0, 1.0, 1.0, 1.0), ModelError);
    CHECK_THROWS_AS(communication_delay(1.0, 1.0, 1.0, 1.0, 0.0), ModelError);
    CHECK_THROWS_AS(communication_delay(1.0, 1.0, 0.0, 1.0, 1.0), ModelError);
}

TEST_CASE("communication delay is homogeneous and decreasing in bandwidth") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 50; ++i) {
        const double d = 1000.0 * u(rng), b = 1e5 * u(rng), snr = u(rng), k = u(rng);
        CHECK(communication_delay(k * d, k * b, snr, 1.0, 1.0) ==
              doctest::Approx(communication_delay(d, b, snr, 1.0, 1.0)));
        CHECK(communication_delay(d, 2.0 * b, snr, 1.0, 1.0) <
              communication_delay(d, b, snr, 1.0, 1.0));
    }
}

TEST_CASE("queuing delay is the M/M/1 sojourn time") {
    CHECK(queuing_delay(2.0, 1.0) == doctest::Approx(1.0));
    CHECK(queuing_delay(10000.0, 9990.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(queuing_delay(1.0, 1.0), InfeasibleError);
    CHECK_THROWS_AS(queuing_delay(0.5, 1.0), InfeasibleError);
}

TEST_CASE("response time adds the two delay components") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    inst.services[0].task_size_bits = 4000.0;
    inst.cells[0].per_service[0].channel_gain = 3.0;
    inst.cells[0].per_service[0].arrival_rate = 9990.0;
    inst.fog_budget_tasks_per_s = 20000.0;
    inst.finalize();
    AllocationMatrix a(1, 1);
    a.bw(0, 0) = 1e6;
    a.rate(0, 0) = 10000.0;
    CHECK(response_time(inst, a, 0, 0) == doctest::Approx(0.102));
}

TEST_CASE("response time vanishes as both resources grow") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    AllocationMatrix a(1, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (double scale : {1e6, 1e8, 1e10, 1e12}) {
        a.bw(0, 0) = scale;
        a.rate(0, 0) = inst.cells[0].per_service[0].arrival_rate + scale;
        const double t = response_time(inst, a, 0, 0);
        CHECK(t < prev);
        prev = t;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("response time matches independent recomputation on a 2x2 fixture") {
    ProblemInstance inst = fixtures::tiny(2, 2);
    AllocationMatrix a(2, 2);
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n) {
            a.bw(s, n) = 5e5 * (1 + s + n);
            a.rate(s, n) = inst.cells[s].per_service[n].arrival_rate + 20.0 * (1 + s);
        }
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n) {
            const ServiceLink& l = inst.cells[s].per_service[n];
            const double expect =
                communication_delay(inst.services[n].task_size_bits, a.bw(s, n), l.channel_gain,
                                    l.tx_power, l.noise) +
                queuing_delay(a.rate(s, n), l.arrival_rate);
            CHECK(response_time(inst, a, s, n) == doctest::Approx(expect));
        }
}

TEST_CASE("total objective sums all pairs and is permutation invariant") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    AllocationMatrix a(1, 1);
    a.bw(0, 0) = 1e6;
    a.rate(0, 0) = inst.cells[0].per_service[0].arrival_rate + 50.0;
    CHECK(total_objective(inst, a) == doctest::Approx(response_time(inst, a, 0, 0)));

    ProblemInstance inst2 = fixtures::tiny(2, 2);
    AllocationMatrix a2(2, 2);
    double manual = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n) {
            a2.bw(s, n) = 4e5 + 1e5 * (s + n);
            a2.rate(s, n) = inst2.cells[s].per_service[n].arrival_rate + 30.0;
        }
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < 2; ++n) manual += response_time(inst2, a2, s, n);
    CHECK(total_objective(inst2, a2) == doctest::Approx(manual));

    ProblemInstance swapped = inst2;
    std::swap(swapped.cells[0], swapped.cells[1]);
    swapped.finalize();
    AllocationMatrix a2s(2, 2);
    for (int n = 0; n < 2; ++n) {
        a2s.bw(0, n) = a2.bw(1, n);
        a2s.bw(1, n) = a2.bw(0, n);
        a2s.rate(0, n) = a2.rate(1, n);
        a2s.rate(1, n) = a2.rate(0, n);
    }
    CHECK(total_objective(swapped, a2s) == doctest::Approx(total_objective(inst2, a2)));
}

TEST_CASE("delay terms are midpoint convex on the open domain") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double b1 = 1e5 * u(rng), b2 = 1e5 * u(rng);
        const double d = 1000.0 * u(rng);
        const double mid_b = communication_delay(d, 0.5 * (b1 + b2), 1.0, 1.0, 1.0);
        CHECK(mid_b <= 0.5 * (communication_delay(d, b1, 1.0, 1.0, 1.0) +
                              communication_delay(d, b2, 1.0, 1.0, 1.0)) +
                          1e-12);
        const double lam = 10.0 * u(rng);
        const double m1 = lam + u(rng), m2 = lam + u(rng);
        const double mid_m = queuing_delay(0.5 * (m1 + m2), lam);
        CHECK(mid_m <= 0.5 * (queuing_delay(m1, lam) + queuing_delay(m2, lam)) + 1e-12);
    }
}

TEST_CASE("poisson quantile basics") {
    CHECK(poisson_quantile(0.9, 0.0) == 0);
    CHECK(poisson_quantile(0.5, 1.0) == 1);
    CHECK(poisson_quantile(0.9, 10.0) == 14);
    CHECK_THROWS_AS(poisson_quantile(0.0, 1.0), ModelError);
    CHECK_THROWS_AS(poisson_quantile(1.0, 1.0), ModelError);
    CHECK_THROWS_AS(poisson_quantile(0.5, -1.0), ModelError);
}

TEST_CASE("poisson quantile is monotone in both arguments") {
    for (double lam : {0.5, 3.0, 42.0, 750.0}) {
        int prev = -1;
        for (double th : {0.05, 0.3, 0.5, 0.7, 0.9, 0.99}) {
            const int q = poisson_quantile(th, lam);
            CHECK(q >= prev);
            prev = q;
        }
    }
    for (double th : {0.3, 0.9}) {
        int prev = -1;
        for (double lam : {0.0, 1.0, 5.0, 30.0, 200.0, 900.0}) {
            const int q = poisson_quantile(th, lam);
            CHECK(q >= prev);
            prev = q;
        }
    }
}

TEST_CASE("feasibility report flags each family") {
    ProblemInstance inst = fixtures::tiny(2, 2);

    SUBCASE("a centrally solved allocation is feasible") {
        CentralResult c = centralized_solve(inst);
        FeasibilityReport rep = feasibility_check(inst, c.alloc, 1e-9);
        CHECK(rep.feasible());
    }

    SUBCASE("bandwidth exactly at the floor is flagged") {
        AllocationMatrix a(2, 2);
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n < 2; ++n) {
                a.bw(s, n) = inst.cells[s].min_slice_bandwidth_hz;
                a.rate(s, n) = inst.cells[s].per_service[n].arrival_rate + 100.0;
            }
        FeasibilityReport rep = feasibility_check(inst, a);
        CHECK_FALSE(rep.min_bandwidth.satisfied);
    }

    SUBCASE("fog budget below total arrivals is unsatisfiable") {
        ProblemInstance low = inst;
        low.fog_budget_tasks_per_s = 0.5 * low.total_arrival_rate();
        AllocationMatrix a(2, 2);
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n < 2; ++n) {
                a.bw(s, n) = 1e5;
                a.rate(s, n) = low.cells[s].per_service[n].arrival_rate + 1.0;
            }
        FeasibilityReport rep = feasibility_check(low, a);
        CHECK_FALSE(rep.fog_budget.satisfied);
        CHECK(rep.fog_budget.worst_violation > 0.0);
    }
}

TEST_CASE("instance validation rejects inconsistent data") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    SUBCASE("fog budget must exceed total arrivals") {
        inst.fog_budget_tasks_per_s = inst.total_arrival_rate();
        CHECK_THROWS_AS(inst.validate(), ModelError);
    }
    SUBCASE("confidence bounds") {
        inst.confidence = 1.0;
        CHECK_THROWS_AS(inst.validate(), ModelError);
    }
    SUBCASE("min slice below budget") {
        inst.cells[0].min_slice_bandwidth_hz = inst.cells[0].bandwidth_budget_hz;
        CHECK_THROWS_AS(inst.validate(), ModelError);
    }
}

TEST_CASE("reserved counts come from the quantile, clamped to one") {
    ProblemInstance inst = fixtures::tiny(1, 1);
    inst.cells[0].per_service[0].arrival_rate = 10.0;
    inst.fog_budget_tasks_per_s = 100.0;
    inst.confidence = 0.9;
    inst.finalize();
    CHECK(inst.reserved_count(0, 0) == 14);

    inst.cells[0].per_service[0].arrival_rate = 0.0;
    inst.fog_budget_tasks_per_s = 1.0;
    inst.finalize();
    CHECK(inst.reserved_count(0, 0) == 1);
}
