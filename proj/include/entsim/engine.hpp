#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "entsim/decoherence.hpp"
#include "entsim/latency.hpp"
#include "entsim/metrics.hpp"
#include "entsim/protocol.hpp"
#include "entsim/topology.hpp"

namespace entsim {

// Everything one simulation run needs. Built by the config loader or directly
// by tests/sweep drivers.
struct RunConfig {
    std::shared_ptr<const Topology> topology;
    std::string node_a;
    std::string node_b;
    double signal_speed_km_per_s = 2.0e5;

    MemoryTechnology technology;
    DephasingConvention convention = DephasingConvention::t2_calibrated;
    double fidelity_threshold = 0.81;
    std::optional<double> timeout_override_s;  // default: timeout_from_threshold

    double source_rate_hz = 0.0;
    std::optional<std::uint64_t> pair_count;   // exactly one of pair_count /
    std::optional<double> duration_s;          // duration_s must be set

    LatencyModel latency = LatencyModel::constant(0.010);
    LatencyPolicy latency_policy = LatencyPolicy::max_shared;

    std::uint32_t buffer_capacity = 0;         // 0 = unbounded
    OverflowPolicy overflow_policy = OverflowPolicy::drop_newest;
    std::optional<double> gap_guard_s;         // default: |delta_tq|
    double prune_horizon_timeouts = 10.0;      // horizon = this * timeout
    bool gap_batching = false;

    double histogram_bin_width = 0.01;
    std::uint64_t seed = 1;

    void validate() const;  // throws config_error / std::invalid_argument
};

// Exposure accumulated by each memory between its store instant and the
// instant its side released the pair. Preconditions: verify >= store.
ExposureIntervals verification_exposure(TimePs t_store_a, TimePs t_store_b,
                                        TimePs t_verify_a, TimePs t_verify_b);

// Observer for --trace output. Calls arrive in deterministic event order.
class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_event(TimePs at, const char* kind, const std::string& node,
                          std::optional<EntanglementId> id) = 0;
    // one call per id covered by the message
    virtual void on_message(MessageKind kind, EntanglementId id,
                            const std::string& sender, TimePs sent_at,
                            TimePs delivered_at) = 0;
};

RunReport run_simulation(const RunConfig& cfg, TraceSink* trace = nullptr);

} // namespace entsim
