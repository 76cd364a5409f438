#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "netslice/oracle.hpp"
#include "netslice/sim.hpp"

namespace netslice {

// Lognormal traffic model of one service class, parameterized by linear-space
// mean and standard deviation (tasks/s).
struct RateModel {
    double mean = 0.0;
    double stddev = 0.0;
};

enum class Period { peak, nonpeak };

inline const char* to_string(Period p) { return p == Period::peak ? "peak" : "nonpeak"; }

// Campus-style two-service scenario: a human-facing class (small tasks, loose
// SLA, low variance) and a vehicular class (bigger tasks, tight SLA, heavier
// and burstier traffic). Defaults put every cell at 60 MHz and the aggregate
// fog budget at 10000 tasks/s per cell.
struct ScenarioSpec {
    int num_cells = 10;
    Period period = Period::peak;
    std::uint64_t seed = 0;

    double cell_bandwidth_hz = 60e6;
    double min_slice_bandwidth_hz = 1e4;
    double fog_rate_per_cell = 10000.0;
    double confidence = 0.9;
    double snr = 1000.0;

    double task_bits_h = 2400.0, task_bits_v = 4000.0;
    double sla_h_s = 0.5, sla_v_s = 0.1;

    RateModel h_peak{300.0, 60.0}, v_peak{600.0, 240.0};
    RateModel h_nonpeak{150.0, 30.0}, v_nonpeak{300.0, 120.0};

    void validate() const {
        if (num_cells < 1) throw ModelError("scenario: num_cells must be >= 1");
        for (const RateModel* r : {&h_peak, &v_peak, &h_nonpeak, &v_nonpeak})
            if (!(r->mean > 0.0) || !(r->stddev > 0.0))
                throw ModelError("scenario: rate means and stddevs must be > 0");
        if (h_peak.mean < h_nonpeak.mean || v_peak.mean < v_nonpeak.mean)
            throw ModelError("scenario: peak means must be >= nonpeak means");
    }
};

namespace detail {

inline double lognormal_draw(const RateModel& r, std::mt19937_64& rng) {
    const double sigma2 = std::log(1.0 + (r.stddev * r.stddev) / (r.mean * r.mean));
    std::lognormal_distribution<double> d(std::log(r.mean) - 0.5 * sigma2, std::sqrt(sigma2));
    return d(rng);
}

}  // namespace detail

inline ProblemInstance generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    const bool peak = spec.period == Period::peak;
    const RateModel& h = peak ? spec.h_peak : spec.h_nonpeak;
    const RateModel& v = peak ? spec.v_peak : spec.v_nonpeak;

    ProblemInstance inst;
    inst.services = {{0, spec.task_bits_h, spec.sla_h_s}, {1, spec.task_bits_v, spec.sla_v_s}};
    inst.confidence = spec.confidence;
    inst.fog_budget_tasks_per_s = spec.fog_rate_per_cell * double(spec.num_cells);

    std::mt19937_64 rng(spec.seed);
    for (int s = 0; s < spec.num_cells; ++s) {
        CellConfig c;
        c.id = s;
        c.bandwidth_budget_hz = spec.cell_bandwidth_hz;
        c.min_slice_bandwidth_hz = spec.min_slice_bandwidth_hz;
        for (const RateModel* r : {&h, &v}) {
            ServiceLink l;
            l.arrival_rate = detail::lognormal_draw(*r, rng);
            l.channel_gain = spec.snr;  // tx_power = noise = 1
            c.per_service.push_back(l);
        }
        inst.cells.push_back(c);
    }
    inst.finalize();
    return inst;
}

// --- arrival-rate tables (CSV: cell_id,service_id,lambda) -----------------

struct RateTable {
    std::map<std::pair<int, int>, double> lambda;  // (cell, service) -> tasks/s
};

inline RateTable load_rates_csv(std::istream& is) {
    RateTable table;
    std::string line;
    int row = 0;
    if (!std::getline(is, line) || line != "cell_id,service_id,lambda")
        throw ModelError("rates csv: expected header cell_id,service_id,lambda");
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int cell = 0, service = 0;
        double lam = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ls >> cell >> c1 >> service >> c2 >> lam) || c1 != ',' || c2 != ',')
            throw ModelError("rates csv: parse error at data row " + std::to_string(row));
        if (lam < 0.0)
            throw ModelError("rates csv: negative lambda at data row " + std::to_string(row));
        if (!table.lambda.emplace(std::make_pair(cell, service), lam).second)
            throw ModelError("rates csv: duplicate (cell " + std::to_string(cell) + ", service " +
                             std::to_string(service) + ") at data row " + std::to_string(row));
    }
    return table;
}

inline RateTable load_rates_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ModelError("cannot open: " + path);
    return load_rates_csv(is);
}

inline void write_rates_csv(const RateTable& table, std::ostream& os) {
    os << "cell_id,service_id,lambda\n";
    for (const auto& [key, lam] : table.lambda)
        os << key.first << ',' << key.second << ',' << lam << '\n';
}

inline RateTable rates_of(const ProblemInstance& inst) {
    RateTable t;
    for (int s = 0; s < inst.S(); ++s)
        for (int n = 0; n < inst.N(); ++n)
            t.lambda[{s, n}] = inst.cells[s].per_service[n].arrival_rate;
    return t;
}

// Overwrites the instance's arrival rates from a table; every (cell, service)
// pair must be covered.
inline void apply_rates(ProblemInstance& inst, const RateTable& table) {
    for (int s = 0; s < inst.S(); ++s)
        for (int n = 0; n < inst.N(); ++n) {
            auto it = table.lambda.find({s, n});
            if (it == table.lambda.end())
                throw ModelError("rates table: missing (cell " + std::to_string(s) + ", service " +
                                 std::to_string(n) + ")");
            inst.cells[s].per_service[n].arrival_rate = it->second;
        }
    inst.finalize();
}

// --- parameter sweeps -----------------------------------------------------

enum class SweepAxis { bandwidth, fog_power, confidence };
enum class SolverKind { central, sync_admm, async_admm };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::bandwidth: return "bandwidth";
        case SweepAxis::fog_power: return "fog_power";
        case SweepAxis::confidence: return "confidence";
    }
    return "?";
}

inline const char* to_string(SolverKind k) {
    switch (k) {
        case SolverKind::central: return "central";
        case SolverKind::sync_admm: return "sync_admm";
        case SolverKind::async_admm: return "async_admm";
    }
    return "?";
}

struct SweepSpec {
    SweepAxis axis = SweepAxis::bandwidth;
    std::vector<double> points;  // bandwidth: beta_s [Hz]; fog_power: per-cell
                                 // rate [tasks/s]; confidence: theta in (0,1)
    std::vector<SlicingMode> modes = {SlicingMode::joint};
    SolverKind solver = SolverKind::central;
    std::uint64_t seed = 0;  // forwarded to async runs

    void validate() const {
        if (points.empty()) throw ModelError("sweep: needs at least one point");
        for (size_t i = 1; i < points.size(); ++i)
            if (!(points[i] > points[i - 1]))
                throw ModelError("sweep: points must be strictly increasing");
        if (modes.empty()) throw ModelError("sweep: needs at least one mode");
    }
};

// The base instance with one axis value replaced; theta counts recomputed.
inline ProblemInstance apply_sweep_point(const ProblemInstance& base, SweepAxis axis,
                                         double point) {
    ProblemInstance inst = base;
    switch (axis) {
        case SweepAxis::bandwidth:
            for (auto& c : inst.cells) c.bandwidth_budget_hz = point;
            break;
        case SweepAxis::fog_power:
            inst.fog_budget_tasks_per_s = point * double(inst.S());
            break;
        case SweepAxis::confidence:
            inst.confidence = point;
            break;
    }
    inst.finalize();
    return inst;
}

struct SweepRow {
    double point = 0.0;
    SlicingMode mode = SlicingMode::joint;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mean_response_s;  // per service
    long iterations = 0;
    bool converged = false;
    std::string error;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::bandwidth;
    SolverKind solver = SolverKind::central;
    int num_services = 0;
    std::vector<SweepRow> rows;

    bool all_converged() const {
        for (const auto& r : rows)
            if (!r.converged) return false;
        return !rows.empty();
    }

    std::string csv_header() const {
        std::string h = "axis,point,mode,solver,objective";
        for (int n = 0; n < num_services; ++n) h += ",mean_rt_" + std::to_string(n);
        return h + ",iterations,converged,error";
    }
    void write_csv(std::ostream& os) const {
        os << csv_header() << '\n';
        for (const auto& r : rows) {
            os << to_string(axis) << ',' << r.point << ',' << to_string(r.mode) << ','
               << to_string(solver) << ',';
            if (std::isfinite(r.objective)) os << r.objective;
            for (int n = 0; n < num_services; ++n) {
                os << ',';
                if (n < int(r.mean_response_s.size())) os << r.mean_response_s[size_t(n)];
            }
            os << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.error << '\n';
        }
    }
};

namespace detail {

inline std::vector<double> per_service_mean_rt(const ProblemInstance& inst,
                                               const AllocationMatrix& a) {
    std::vector<double> rt(size_t(inst.N()), 0.0);
    for (int n = 0; n < inst.N(); ++n) {
        for (int s = 0; s < inst.S(); ++s) rt[size_t(n)] += response_time(inst, a, s, n);
        rt[size_t(n)] /= double(inst.S());
    }
    return rt;
}

}  // namespace detail

// Runs every (point, mode) combination; per-point failures are recorded in
// the row and the sweep continues. ADMM solvers apply to the joint mode, the
// baselines always go through the restricted interior-point solver.
inline SweepResult run_sweep(const ProblemInstance& base, const SweepSpec& sweep) {
    sweep.validate();
    SweepResult out;
    out.axis = sweep.axis;
    out.solver = sweep.solver;
    out.num_services = base.N();
    for (double point : sweep.points) {
        for (SlicingMode mode : sweep.modes) {
            SweepRow row;
            row.point = point;
            row.mode = mode;
            try {
                const ProblemInstance inst = apply_sweep_point(base, sweep.axis, point);
                AllocationMatrix alloc;
                if (mode == SlicingMode::joint && sweep.solver == SolverKind::sync_admm) {
                    SyncRunResult r = AdmmSync(inst).run();
                    alloc = r.alloc;
                    row.objective = r.objective;
                    row.iterations = r.iterations;
                    row.converged = r.converged;
                } else if (mode == SlicingMode::joint && sweep.solver == SolverKind::async_admm) {
                    AsyncOptions opts;
                    opts.seed = sweep.seed;
                    AsyncRunResult r = AdmmAsync(inst, opts).run();
                    alloc = r.alloc;
                    row.objective = r.objective;
                    row.iterations = r.updates;
                    row.converged = r.converged;
                } else {
                    ModeSolveResult r = solve_mode(inst, mode);
                    alloc = r.alloc;
                    row.objective = r.objective;
                    row.iterations = 1;
                    row.converged = r.converged;
                }
                row.mean_response_s = detail::per_service_mean_rt(inst, alloc);
            } catch (const ModelError& e) {
                row.error = e.what();
                row.converged = false;
            }
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

// --- sync vs async race ---------------------------------------------------

struct RaceResult {
    SimReport sync_report;
    SimReport async_report;
    double central_objective = 0.0;
    double objective_target = 0.0;  // central * (1 + rel_tol)
};

// Step-size choice for races: a softer prox weight with a larger relaxation
// step reaches a fixed objective target in fewer block updates than the
// all-purpose defaults.
inline AsyncOptions race_async_defaults() {
    AsyncOptions o;
    o.rho = 0.3;
    o.alpha = 0.8;
    return o;
}

// Both simulators chase the same objective target on the same instance and
// timing seed, so their sim_time_to_tol values are directly comparable.
inline RaceResult run_race(const ProblemInstance& inst, const TimingModel& timing,
                           double rel_tol = 1e-3, const SyncOptions& sync_opts = {},
                           const AsyncOptions& async_opts = race_async_defaults()) {
    RaceResult out;
    out.central_objective = centralized_solve(inst).objective;
    out.objective_target = out.central_objective * (1.0 + rel_tol);
    out.sync_report = simulate_sync(inst, timing, sync_opts, out.objective_target);
    out.async_report = simulate_async(inst, timing, async_opts, -1, out.objective_target);
    return out;
}

}  // namespace netslice
