#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "fixtures.hpp"
#include "netslice/instance_io.hpp"

using namespace netslice;

TEST_CASE("scenario generation is seeded and well formed") {
    ScenarioSpec spec;
    spec.seed = 17;
    ProblemInstance a = generate_scenario(spec);
    ProblemInstance b = generate_scenario(spec);
    CHECK(a.S() == 10);
    CHECK(a.N() == 2);
    for (int s = 0; s < a.S(); ++s)
        for (int n = 0; n < a.N(); ++n)
            CHECK(a.cells[s].per_service[n].arrival_rate ==
                  b.cells[s].per_service[n].arrival_rate);
    CHECK_NOTHROW(a.validate());

    spec.seed = 18;
    ProblemInstance c = generate_scenario(spec);
    CHECK(c.cells[0].per_service[0].arrival_rate != a.cells[0].per_service[0].arrival_rate);
}

TEST_CASE("scenario validation rejects inconsistent presets") {
    ScenarioSpec spec;
    spec.num_cells = 0;
    CHECK_THROWS_AS(generate_scenario(spec), ModelError);
    spec.num_cells = 2;
    spec.h_peak.mean = 10.0;
    spec.h_nonpeak.mean = 20.0;
    CHECK_THROWS_AS(generate_scenario(spec), ModelError);
}

TEST_CASE("rate tables round-trip through csv") {
    std::string csv = "cell_id,service_id,lambda\n0,0,10.5\n0,1,20\n1,0,30\n1,1,40\n";
    std::istringstream is(csv);
    RateTable t = load_rates_csv(is);
    CHECK(t.lambda.size() == 4);
    CHECK(t.lambda.at({0, 0}) == doctest::Approx(10.5));

    std::ostringstream os;
    write_rates_csv(t, os);
    std::istringstream is2(os.str());
    RateTable t2 = load_rates_csv(is2);
    CHECK(t2.lambda == t.lambda);
}

TEST_CASE("rate table rejects malformed rows") {
    SUBCASE("bad header") {
        std::istringstream is("cell,service,lambda\n");
        CHECK_THROWS_AS(load_rates_csv(is), ModelError);
    }
    SUBCASE("negative rate names the row") {
        std::istringstream is("cell_id,service_id,lambda\n0,0,5\n0,1,-2\n");
        CHECK_THROWS_WITH_AS(load_rates_csv(is),
                             "rates csv: negative lambda at data row 2", ModelError);
    }
    SUBCASE("duplicate key") {
        std::istringstream is("cell_id,service_id,lambda\n0,0,5\n0,0,6\n");
        CHECK_THROWS_AS(load_rates_csv(is), ModelError);
    }
    SUBCASE("parse error") {
        std::istringstream is("cell_id,service_id,lambda\n0;0;5\n");
        CHECK_THROWS_AS(load_rates_csv(is), ModelError);
    }
}

TEST_CASE("applying a rate table overwrites arrivals and recomputes counts") {
    ProblemInstance inst = fixtures::tiny(2, 2);
    RateTable t = rates_of(inst);
    for (auto& [key, lam] : t.lambda) lam *= 2.0;
    inst.fog_budget_tasks_per_s *= 4.0;
    apply_rates(inst, t);
    CHECK(inst.cells[1].per_service[1].arrival_rate == doctest::Approx(t.lambda.at({1, 1})));

    RateTable missing;
    missing.lambda[{0, 0}] = 5.0;
    CHECK_THROWS_AS(apply_rates(inst, missing), ModelError);
}

TEST_CASE("instances round-trip through json files") {
    ProblemInstance inst = fixtures::table_scenario(4);
    const std::string path = "roundtrip_instance.json";
    save_instance(inst, path);
    ProblemInstance back = load_instance(path);
    std::remove(path.c_str());
    CHECK(back.S() == inst.S());
    CHECK(back.fog_budget_tasks_per_s == inst.fog_budget_tasks_per_s);
    for (int s = 0; s < inst.S(); ++s)
        for (int n = 0; n < inst.N(); ++n) {
            CHECK(back.cells[s].per_service[n].arrival_rate ==
                  inst.cells[s].per_service[n].arrival_rate);
            CHECK(back.reserved_count(s, n) == inst.reserved_count(s, n));
        }
    CHECK_THROWS_AS(load_instance("does_not_exist.json"), ModelError);
    CHECK_THROWS_AS(instance_from_json(json::object()), ModelError);
}

TEST_CASE("sweep points modify the advertised axis") {
    ProblemInstance base = fixtures::tiny(2, 2);
    ProblemInstance bw = apply_sweep_point(base, SweepAxis::bandwidth, 7e6);
    CHECK(bw.cells[0].bandwidth_budget_hz == 7e6);
    CHECK(bw.cells[1].bandwidth_budget_hz == 7e6);
    ProblemInstance fog = apply_sweep_point(base, SweepAxis::fog_power, 5000.0);
    CHECK(fog.fog_budget_tasks_per_s == doctest::Approx(10000.0));
    ProblemInstance conf = apply_sweep_point(base, SweepAxis::confidence, 0.99);
    CHECK(conf.confidence == 0.99);
    CHECK(conf.reserved_count(0, 0) >= base.reserved_count(0, 0));
}

TEST_CASE("sweep validation enforces ordering") {
    SweepSpec sweep;
    sweep.points = {2.0, 1.0};
    CHECK_THROWS_AS(sweep.validate(), ModelError);
    sweep.points = {};
    CHECK_THROWS_AS(sweep.validate(), ModelError);
}

TEST_CASE("a single-point sweep equals the direct solver call") {
    ProblemInstance base = fixtures::tiny(2, 2);
    SweepSpec sweep;
    sweep.axis = SweepAxis::bandwidth;
    sweep.points = {base.cells[0].bandwidth_budget_hz};
    SweepResult r = run_sweep(base, sweep);
    REQUIRE(r.rows.size() == 1);
    ProblemInstance same = apply_sweep_point(base, SweepAxis::bandwidth, sweep.points[0]);
    ModeSolveResult direct = solve_mode(same, SlicingMode::joint);
    CHECK(r.rows[0].objective == doctest::Approx(direct.objective));
    CHECK(r.rows[0].converged);
}

TEST_CASE("joint objective trends follow the axis direction") {
    ProblemInstance base = fixtures::tiny(3, 2);
    SUBCASE("more bandwidth never hurts") {
        SweepSpec sweep;
        sweep.axis = SweepAxis::bandwidth;
        sweep.points = {3e6, 4e6, 5e6, 6e6};
        SweepResult r = run_sweep(base, sweep);
        REQUIRE(r.all_converged());
        for (size_t i = 1; i < r.rows.size(); ++i)
            CHECK(r.rows[i].objective <= r.rows[i - 1].objective + 1e-9);
    }
    SUBCASE("a stricter confidence level never helps") {
        SweepSpec sweep;
        sweep.axis = SweepAxis::confidence;
        sweep.points = {0.8, 0.9, 0.95};
        SweepResult r = run_sweep(base, sweep);
        REQUIRE(r.all_converged());
        for (size_t i = 1; i < r.rows.size(); ++i)
            CHECK(r.rows[i].objective >= r.rows[i - 1].objective - 1e-9);
    }
}

TEST_CASE("per-point failures are recorded without aborting the sweep") {
    ProblemInstance base = fixtures::tiny(2, 2);
    SweepSpec sweep;
    sweep.axis = SweepAxis::fog_power;
    // First point sits below the total arrival rate: infeasible.
    sweep.points = {1.0, 0.8 * base.fog_budget_tasks_per_s / 2.0};
    SweepResult r = run_sweep(base, sweep);
    REQUIRE(r.rows.size() == 2);
    CHECK_FALSE(r.rows[0].converged);
    CHECK_FALSE(r.rows[0].error.empty());
    CHECK(r.rows[1].converged);
    CHECK_FALSE(r.all_converged());
}

TEST_CASE("sweep csv schema is stable") {
    ProblemInstance base = fixtures::tiny(2, 2);
    SweepSpec sweep;
    sweep.points = {base.cells[0].bandwidth_budget_hz};
    SweepResult r = run_sweep(base, sweep);
    CHECK(r.csv_header() ==
          "axis,point,mode,solver,objective,mean_rt_0,mean_rt_1,iterations,converged,error");
    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str().rfind("axis,point,mode,solver,objective", 0) == 0);
}

TEST_CASE("admm solvers drive sweeps to the same objectives as the central one") {
    ProblemInstance base = fixtures::tiny(2, 2);
    SweepSpec sweep;
    sweep.axis = SweepAxis::bandwidth;
    sweep.points = {4e6, 6e6};
    SweepResult central = run_sweep(base, sweep);
    sweep.solver = SolverKind::sync_admm;
    SweepResult sync = run_sweep(base, sweep);
    sweep.solver = SolverKind::async_admm;
    SweepResult async = run_sweep(base, sweep);
    REQUIRE(central.all_converged());
    REQUIRE(sync.all_converged());
    REQUIRE(async.all_converged());
    for (size_t i = 0; i < central.rows.size(); ++i) {
        CHECK(std::abs(sync.rows[i].objective - central.rows[i].objective) /
                  central.rows[i].objective < 1e-3);
        CHECK(std::abs(async.rows[i].objective - central.rows[i].objective) /
                  central.rows[i].objective < 1e-3);
    }
}

TEST_CASE("homogeneous race is roughly even, both hit the target") {
    ProblemInstance inst = fixtures::table_scenario(1);
    TimingModel timing = TimingModel::homogeneous(10, 1.0, 0);
    timing.deterministic = true;
    RaceResult race = run_race(inst, timing);
    REQUIRE(race.sync_report.converged);
    REQUIRE(race.async_report.converged);
    const double ratio = race.async_report.sim_time_to_tol / race.sync_report.sim_time_to_tol;
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 1.5);
    CHECK(race.sync_report.objective <= race.objective_target + 1e-12);
    CHECK(race.async_report.objective <= race.objective_target + 1e-12);
}
