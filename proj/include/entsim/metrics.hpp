#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "entsim/protocol.hpp"
#include "entsim/time.hpp"

namespace entsim {

// Time-weighted mean and peak of an integer-valued step function (buffer
// occupancy). Sample on every change; the mean divides by an externally
// chosen duration (the emission window) so Little's-law comparisons are exact.
class OccupancyTracker {
public:
    void sample(TimePs now, std::uint32_t occupancy);
    void finalize(TimePs end);
    double mean(double duration_s) const;
    std::uint32_t max() const { return max_; }
    double integral_s() const { return integral_ps_ / kPsPerSecond; }

private:
    bool started_ = false;
    TimePs last_t_ = 0;
    std::uint32_t last_occ_ = 0;
    std::uint32_t max_ = 0;
    double integral_ps_ = 0.0;
};

struct FidelityStats {
    std::uint64_t count = 0;
    double sum = 0.0;
    double min = 1.0;
    double max = 0.0;
    double bin_width = 0.01;
    std::vector<std::uint64_t> histogram;  // bin i covers [i*w, (i+1)*w), last bin closed

    void configure(double width);
    void add(double f);
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct NodeReport {
    std::string id;
    NodeCounters counters;
    double occupancy_mean = 0.0;
    std::uint32_t occupancy_max = 0;
    double max_record_lifetime_s = 0.0;
};

// Pair-level fates; exactly one per emitted pair.
struct PairFates {
    std::uint64_t emitted = 0;
    std::uint64_t verified = 0;
    std::uint64_t lost = 0;       // >= 1 photon lost in fiber
    std::uint64_t overflow = 0;   // >= 1 arm rejected/evicted by a full buffer
    std::uint64_t timed_out = 0;  // stored on both ends but the window expired
    std::uint64_t in_flight = 0;  // unresolved at drain (should be 0)
};

struct RunReport {
    std::uint64_t seed = 0;
    double duration_s = 0.0;               // emission window
    double effective_source_rate_hz = 0.0; // 1e12 / period_ps
    double timeout_s = 0.0;
    double delta_tq_s = 0.0;               // |store-time skew| between the arms
    PairFates pairs;
    double verified_rate_hz = 0.0;
    FidelityStats fidelity;
    std::vector<NodeReport> nodes;         // [node_a, node_b]
    bool agreement = true;                 // consumed-id sets identical on both ends
    std::uint64_t events_processed = 0;
    std::uint64_t messages_delivered = 0;
    // indexed by MessageKind: announce, discard_notify, gap_discard
    std::array<std::uint64_t, 3> messages_sent{};

    // throws protocol_error if the pair fates do not partition the emitted set
    void check_conservation() const;
};

} // namespace entsim
