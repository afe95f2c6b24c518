#include "entsim/experiments.hpp"

#include <cmath>

#include "entsim/errors.hpp"

namespace entsim {

std::vector<FidelityCurvePoint> fidelity_curve(
    const std::vector<MemoryTechnology>& technologies,
    const std::vector<double>& time_grid_s,
    DephasingConvention conv) {
    if (technologies.empty()) throw config_error("fidelity-curve: no technologies selected");
    if (time_grid_s.empty()) throw config_error("fidelity-curve: empty time grid");
    for (std::size_t i = 0; i < time_grid_s.size(); ++i) {
        const double t = time_grid_s[i];
        if (!(t >= 0.0) || !std::isfinite(t))
            throw config_error("fidelity-curve: grid times must be finite and >= 0");
        if (i > 0 && !(t > time_grid_s[i - 1]))
            throw config_error("fidelity-curve: grid must be strictly increasing");
    }
    std::vector<FidelityCurvePoint> rows;
    rows.reserve(technologies.size() * time_grid_s.size());
    for (const auto& tech : technologies)
        for (const double t : time_grid_s)
            rows.push_back({tech.id, t,
                            closed_form_fidelity(ExposureIntervals::equal(t), tech, conv)});
    return rows;
}

std::vector<BufferSweepRow> buffer_sweep(
    const RunConfig& base,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<double>& latencies_s) {
    if (pairs.empty()) throw config_error("buffer-sweep: no node pairs selected");
    if (latencies_s.empty()) throw config_error("buffer-sweep: no latencies given");
    std::vector<BufferSweepRow> rows;
    for (const auto& [na, nb] : pairs) {
        for (const double lat : latencies_s) {
            RunConfig cfg = base;  // same seed on purpose: rows share random draws
            cfg.node_a = na;
            cfg.node_b = nb;
            cfg.latency = LatencyModel::constant(lat);
            const RunReport rep = run_simulation(cfg);
            BufferSweepRow row;
            row.latency_s = lat;
            row.node_a = na;
            row.node_b = nb;
            row.occupancy_mean_a = rep.nodes[0].occupancy_mean;
            row.occupancy_mean_b = rep.nodes[1].occupancy_mean;
            row.occupancy_max_a = rep.nodes[0].occupancy_max;
            row.occupancy_max_b = rep.nodes[1].occupancy_max;
            row.verified = rep.pairs.verified;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<RateSweepRow> rate_vs_timeout(const RunConfig& base,
                                          const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw config_error("rate-sweep: no thresholds given");
    const QuantumPath pa = base.topology->path_from_source(base.node_a);
    const QuantumPath pb = base.topology->path_from_source(base.node_b);
    const double delta_tq = std::abs(arm_delay_s(pa, base.signal_speed_km_per_s) -
                                     arm_delay_s(pb, base.signal_speed_km_per_s));
    std::vector<RateSweepRow> rows;
    for (const double f_th : thresholds) {
        RunConfig cfg = base;  // common random numbers across rows
        cfg.fidelity_threshold = f_th;
        cfg.timeout_override_s.reset();
        const RunReport rep = run_simulation(cfg);
        RateSweepRow row;
        row.fidelity_threshold = f_th;
        row.timeout_s = rep.timeout_s;
        row.max_tolerable_latency_s =
            max_tolerable_latency(f_th, base.technology, delta_tq, base.convention);
        row.verified = rep.pairs.verified;
        row.verified_rate_hz = rep.verified_rate_hz;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace entsim
