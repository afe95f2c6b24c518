#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entsim/engine.hpp"

namespace entsim {

// Sweep drivers behind the CLI subcommands. All of them reuse the base
// config's seed for every row (common random numbers), so rows differ only in
// the swept knob and the documented monotone trends hold exactly, not just in
// expectation.

struct FidelityCurvePoint {
    std::string technology;
    double t_s = 0.0;
    double fidelity = 0.0;
};

// Closed-form fidelity at equal exposures tau_a = tau_b = t over a time grid.
// grid must be finite, non-negative and strictly increasing.
std::vector<FidelityCurvePoint> fidelity_curve(
    const std::vector<MemoryTechnology>& technologies,
    const std::vector<double>& time_grid_s,
    DephasingConvention conv);

struct BufferSweepRow {
    double latency_s = 0.0;
    std::string node_a;
    std::string node_b;
    double occupancy_mean_a = 0.0;
    double occupancy_mean_b = 0.0;
    std::uint32_t occupancy_max_a = 0;
    std::uint32_t occupancy_max_b = 0;
    std::uint64_t verified = 0;
};

// Re-runs the base config for each (pair, constant latency) combination.
std::vector<BufferSweepRow> buffer_sweep(
    const RunConfig& base,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<double>& latencies_s);

struct RateSweepRow {
    double fidelity_threshold = 0.0;
    double timeout_s = 0.0;
    std::optional<double> max_tolerable_latency_s;  // nullopt = always satisfiable
    std::uint64_t verified = 0;
    double verified_rate_hz = 0.0;
};

// Verified-pair rate as the threshold (hence the verification window) varies.
std::vector<RateSweepRow> rate_vs_timeout(const RunConfig& base,
                                          const std::vector<double>& thresholds);

} // namespace entsim
