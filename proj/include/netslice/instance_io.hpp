#pragma once

#include <fstream>

#include <json.hpp>

#include "netslice/model.hpp"

namespace netslice {

using json = nlohmann::json;

// JSON layout (see schema/instance.schema.json):
//   services[]: {id, task_size_bits, latency_sla_s}
//   cells[]:    {id, bandwidth_budget_hz, min_slice_bandwidth_hz,
//                per_service[]: {arrival_rate, channel_gain, tx_power, noise}}
//   fog_budget_tasks_per_s, confidence, optional eps
// All fields carry SI units: Hz, bits, seconds, tasks/s, W.

inline json to_json(const ProblemInstance& inst) {
    json j;
    j["services"] = json::array();
    for (const auto& sv : inst.services)
        j["services"].push_back({{"id", sv.id},
                                 {"task_size_bits", sv.task_size_bits},
                                 {"latency_sla_s", sv.latency_sla_s}});
    j["cells"] = json::array();
    for (const auto& c : inst.cells) {
        json links = json::array();
        for (const auto& l : c.per_service)
            links.push_back({{"arrival_rate", l.arrival_rate},
                             {"channel_gain", l.channel_gain},
                             {"tx_power", l.tx_power},
                             {"noise", l.noise}});
        j["cells"].push_back({{"id", c.id},
                              {"bandwidth_budget_hz", c.bandwidth_budget_hz},
                              {"min_slice_bandwidth_hz", c.min_slice_bandwidth_hz},
                              {"per_service", std::move(links)}});
    }
    j["fog_budget_tasks_per_s"] = inst.fog_budget_tasks_per_s;
    j["confidence"] = inst.confidence;
    j["eps"] = inst.eps;
    return j;
}

inline ProblemInstance instance_from_json(const json& j) {
    ProblemInstance inst;
    try {
        for (const auto& sj : j.at("services")) {
            ServiceClass sv;
            sv.id = sj.at("id").get<int>();
            sv.task_size_bits = sj.at("task_size_bits").get<double>();
            sv.latency_sla_s = sj.at("latency_sla_s").get<double>();
            inst.services.push_back(sv);
        }
        for (const auto& cj : j.at("cells")) {
            CellConfig c;
            c.id = cj.at("id").get<int>();
            c.bandwidth_budget_hz = cj.at("bandwidth_budget_hz").get<double>();
            c.min_slice_bandwidth_hz = cj.at("min_slice_bandwidth_hz").get<double>();
            for (const auto& lj : cj.at("per_service")) {
                ServiceLink l;
                l.arrival_rate = lj.at("arrival_rate").get<double>();
                l.channel_gain = lj.value("channel_gain", 1.0);
                l.tx_power = lj.value("tx_power", 1.0);
                l.noise = lj.value("noise", 1.0);
                c.per_service.push_back(l);
            }
            inst.cells.push_back(c);
        }
        inst.fog_budget_tasks_per_s = j.at("fog_budget_tasks_per_s").get<double>();
        inst.confidence = j.at("confidence").get<double>();
        inst.eps = j.value("eps", 1e-6);
    } catch (const json::exception& e) {
        throw ModelError(std::string("instance json: ") + e.what());
    }
    inst.finalize();
    return inst;
}

inline void save_instance(const ProblemInstance& inst, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ModelError("cannot open for write: " + path);
    os << to_json(inst).dump(2) << '\n';
}

inline ProblemInstance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ModelError("cannot open: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ModelError(path + ": " + e.what());
    }
    return instance_from_json(j);
}

}  // namespace netslice
