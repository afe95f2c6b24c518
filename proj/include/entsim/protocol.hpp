#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "entsim/errors.hpp"
#include "entsim/time.hpp"

namespace entsim {

using EntanglementId = std::uint64_t;

enum class MessageKind : std::uint8_t { announce, discard_notify, gap_discard };

const char* to_string(MessageKind k);

// Classical control message. gap_discard may cover a contiguous id range
// [id, id_last] when batching is enabled; otherwise id_last == id.
struct ControlMessage {
    MessageKind kind = MessageKind::announce;
    EntanglementId id = 0;
    EntanglementId id_last = 0;
    std::string sender;
    TimePs sent_at = 0;
};

enum class RecordStatus : std::uint8_t {
    awaiting_partner,
    verified,            // transient: announce matched, consumption follows immediately
    consumed,
    discarded_timeout,
    discarded_gap,       // partner reported the photon never arrived
    discarded_notified,  // partner timed out / evicted first and told us
    discarded_overflow,  // evicted locally by the drop-oldest overflow policy
};

const char* to_string(RecordStatus s);

struct QubitRecord {
    EntanglementId id = 0;
    TimePs stored_at = 0;
    TimePs deadline = 0;
    RecordStatus status = RecordStatus::awaiting_partner;
    std::uint32_t slot = 0;
};

enum class OverflowPolicy : std::uint8_t { drop_newest, drop_oldest_unverified };

struct ProtocolConfig {
    TimePs timeout_ps = 0;           // verification window Delta_t
    TimePs gap_guard_ps = 0;         // delay before a gap_discard is sent
    std::uint32_t buffer_capacity = 0;  // 0 = unbounded
    OverflowPolicy overflow = OverflowPolicy::drop_newest;
    TimePs prune_horizon_ps = 0;     // age after which dead bookkeeping is dropped
    bool gap_batching = false;
};

struct NodeCounters {
    std::uint64_t stored = 0;
    std::uint64_t announces_sent = 0;
    std::uint64_t consumed = 0;  // == verified pairs seen from this side
    std::uint64_t discarded_timeout = 0;
    std::uint64_t discarded_gap = 0;
    std::uint64_t discarded_notified = 0;
    std::uint64_t discarded_overflow = 0;
    std::uint64_t overflow_dropped = 0;   // drop-newest rejections (never stored)
    std::uint64_t headers_without_photon = 0;
    std::uint64_t gap_discards_sent = 0;
    std::uint64_t discard_notifies_sent = 0;
    std::uint64_t announces_received = 0;
    std::uint64_t discards_received = 0;  // ids covered, both discard kinds
    std::uint64_t late_announces = 0;     // announce for an already-resolved id
    std::uint64_t late_discards = 0;      // discard for an already-resolved id
    std::uint64_t announces_for_lost = 0; // announce for an id we know never arrived
    std::uint64_t cross_check_deferrals = 0;  // announce seen but partner can't confirm in time
};

// Result of storing an arriving photon.
struct StoreResult {
    bool stored = false;                  // a record was created
    bool consumed = false;                // matched a pending partner announce
    bool overflow_dropped = false;        // rejected by drop-newest
    std::optional<RecordStatus> tombstone_discard;  // discarded at arrival (partner already gave up)
    std::optional<EntanglementId> evicted;          // drop-oldest victim
    std::vector<ControlMessage> messages;
};

struct AnnounceResult {
    bool consumed = false;   // verified here: record released for use
    bool parked = false;     // no local record yet; kept as pending
    bool deferred = false;   // record exists but partner-side confirmation can't happen in time
    bool late = false;       // id already resolved locally
};

struct TimeoutResult {
    bool discarded = false;  // false: record already resolved (stale timer)
    std::vector<ControlMessage> messages;
};

struct DiscardResult {
    std::vector<EntanglementId> discarded;    // live records released
    std::uint64_t tombstoned = 0;             // ids noted for a photon yet to arrive
    std::uint64_t late = 0;                   // ids already resolved
};

// Per-node control state. Owns the memory-buffer ledger, emits control
// messages, and never consumes one-sidedly: an announce is acted on only when
// the mirror-image announce provably reaches the partner inside its window
// (see on_announce_received).
class NodeState {
public:
    NodeState(std::string id, ProtocolConfig cfg);

    const std::string& id() const { return id_; }
    const ProtocolConfig& config() const { return cfg_; }

    // Photon + header arrived and the qubit is loaded into the local memory.
    StoreResult on_photon_stored(EntanglementId id, TimePs now);

    // Header arrived but the heralding photon did not (fiber loss).
    std::vector<ControlMessage> on_header_without_photon(EntanglementId id, TimePs now);

    AnnounceResult on_announce_received(const ControlMessage& msg, TimePs now);

    // Verification-window expiry for one record.
    TimeoutResult on_timeout(EntanglementId id, TimePs now);

    DiscardResult on_discard_received(const ControlMessage& msg, TimePs now);

    // Live records currently holding a buffer slot.
    std::uint32_t occupancy() const { return static_cast<std::uint32_t>(records_.size()); }

    const NodeCounters& counters() const { return counters_; }
    const std::vector<EntanglementId>& consumed_ids() const { return consumed_ids_; }
    TimePs max_record_lifetime_ps() const { return max_record_lifetime_; }
    std::optional<QubitRecord> record(EntanglementId id) const;

private:
    struct PendingAnnounce {
        TimePs sent_at;
        TimePs received_at;
    };

    void prune(TimePs now);
    void note_seen(EntanglementId id, TimePs now, std::vector<ControlMessage>& out);
    void push_gap_discards(std::vector<EntanglementId>&& ids, TimePs now,
                           std::vector<ControlMessage>& out);
    bool partner_can_confirm(TimePs announce_sent_at, TimePs own_store_at, TimePs now) const;
    void resolve(std::map<EntanglementId, QubitRecord>::iterator it, RecordStatus status, TimePs now);
    ControlMessage make(MessageKind kind, EntanglementId first, EntanglementId last, TimePs sent_at) const;

    std::string id_;
    ProtocolConfig cfg_;
    NodeCounters counters_;

    std::map<EntanglementId, QubitRecord> records_;  // live (awaiting) records only
    std::deque<EntanglementId> store_order_;         // FIFO for drop-oldest eviction

    // slot allocator: lowest free slot first
    std::set<std::uint32_t> free_slots_;
    std::uint32_t next_fresh_slot_ = 0;

    // resolved/known-dead bookkeeping, pruned after cfg_.prune_horizon_ps
    std::map<EntanglementId, RecordStatus> resolved_;
    std::deque<std::pair<TimePs, EntanglementId>> resolved_age_;
    std::map<EntanglementId, RecordStatus> tombstones_;  // discard arrived before the photon
    std::deque<std::pair<TimePs, EntanglementId>> tombstone_age_;
    std::set<EntanglementId> known_lost_;
    std::deque<std::pair<TimePs, EntanglementId>> known_lost_age_;
    std::map<EntanglementId, PendingAnnounce> pending_;  // announce arrived before the photon
    std::deque<std::pair<TimePs, EntanglementId>> pending_age_;

    bool any_seen_ = false;
    EntanglementId highest_seen_ = 0;

    std::vector<EntanglementId> consumed_ids_;
    TimePs max_record_lifetime_ = 0;

    std::uint32_t allocate_slot();
    void release_slot(std::uint32_t slot);
};

} // namespace entsim
