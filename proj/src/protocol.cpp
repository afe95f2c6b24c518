#include "entsim/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace entsim {

const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::announce: return "announce";
        case MessageKind::discard_notify: return "discard_notify";
        case MessageKind::gap_discard: return "gap_discard";
    }
    return "?";
}

const char* to_string(RecordStatus s) {
    switch (s) {
        case RecordStatus::awaiting_partner: return "awaiting_partner";
        case RecordStatus::verified: return "verified";
        case RecordStatus::consumed: return "consumed";
        case RecordStatus::discarded_timeout: return "discarded_timeout";
        case RecordStatus::discarded_gap: return "discarded_gap";
        case RecordStatus::discarded_notified: return "discarded_notified";
        case RecordStatus::discarded_overflow: return "discarded_overflow";
    }
    return "?";
}

NodeState::NodeState(std::string id, ProtocolConfig cfg)
    : id_(std::move(id)), cfg_(cfg) {
    if (cfg_.timeout_ps <= 0)
        throw std::invalid_argument("protocol: timeout must be positive");
    if (cfg_.gap_guard_ps < 0)
        throw std::invalid_argument("protocol: gap guard must be >= 0");
    if (cfg_.prune_horizon_ps <= 0) cfg_.prune_horizon_ps = 10 * cfg_.timeout_ps;
}

ControlMessage NodeState::make(MessageKind kind, EntanglementId first, EntanglementId last,
                               TimePs sent_at) const {
    return ControlMessage{kind, first, last, id_, sent_at};
}

std::uint32_t NodeState::allocate_slot() {
    if (!free_slots_.empty()) {
        const std::uint32_t s = *free_slots_.begin();
        free_slots_.erase(free_slots_.begin());
        return s;
    }
    return next_fresh_slot_++;
}

void NodeState::release_slot(std::uint32_t slot) { free_slots_.insert(slot); }

void NodeState::prune(TimePs now) {
    const TimePs horizon = cfg_.prune_horizon_ps;
    auto sweep = [&](auto& age, auto& store) {
        while (!age.empty() && age.front().first + horizon < now) {
            store.erase(age.front().second);
            age.pop_front();
        }
    };
    sweep(resolved_age_, resolved_);
    sweep(tombstone_age_, tombstones_);
    sweep(known_lost_age_, known_lost_);
    sweep(pending_age_, pending_);
}

void NodeState::push_gap_discards(std::vector<EntanglementId>&& ids, TimePs now,
                                  std::vector<ControlMessage>& out) {
    if (ids.empty()) return;
    const TimePs sent_at = now + cfg_.gap_guard_ps;
    counters_.gap_discards_sent += ids.size();
    if (!cfg_.gap_batching) {
        for (EntanglementId g : ids) out.push_back(make(MessageKind::gap_discard, g, g, sent_at));
        return;
    }
    // coalesce contiguous runs into [id, id_last] ranges
    std::size_t i = 0;
    while (i < ids.size()) {
        std::size_t j = i;
        while (j + 1 < ids.size() && ids[j + 1] == ids[j] + 1) ++j;
        out.push_back(make(MessageKind::gap_discard, ids[i], ids[j], sent_at));
        i = j + 1;
    }
}

// Sequence-contiguity inference: ids are emitted densely, so an id above the
// highest ever seen implies everything in between went missing entirely
// (photon and header). Tombstoned ids are already resolved by the partner.
void NodeState::note_seen(EntanglementId id, TimePs now, std::vector<ControlMessage>& out) {
    if (!any_seen_) {
        any_seen_ = true;
        highest_seen_ = id;
        return;
    }
    if (id <= highest_seen_) return;  // out-of-order arrival opens no new range
    std::vector<EntanglementId> gaps;
    for (EntanglementId g = highest_seen_ + 1; g < id; ++g)
        if (!tombstones_.count(g)) gaps.push_back(g);
    highest_seen_ = id;
    push_gap_discards(std::move(gaps), now, out);
}

void NodeState::resolve(std::map<EntanglementId, QubitRecord>::iterator it,
                        RecordStatus status, TimePs now) {
    max_record_lifetime_ = std::max(max_record_lifetime_, now - it->second.stored_at);
    release_slot(it->second.slot);
    const EntanglementId id = it->first;
    records_.erase(it);
    resolved_[id] = status;
    resolved_age_.emplace_back(now, id);
    switch (status) {
        case RecordStatus::consumed:
            ++counters_.consumed;
            consumed_ids_.push_back(id);
            break;
        case RecordStatus::discarded_timeout: ++counters_.discarded_timeout; break;
        case RecordStatus::discarded_gap: ++counters_.discarded_gap; break;
        case RecordStatus::discarded_notified: ++counters_.discarded_notified; break;
        case RecordStatus::discarded_overflow: ++counters_.discarded_overflow; break;
        default:
            throw protocol_error("resolve() called with a non-terminal status");
    }
}

StoreResult NodeState::on_photon_stored(EntanglementId id, TimePs now) {
    prune(now);
    StoreResult res;
    if (records_.count(id) || resolved_.count(id)) {
        std::ostringstream os;
        os << "node " << id_ << ": duplicate store for id " << id;
        throw protocol_error(os.str());
    }
    note_seen(id, now, res.messages);

    // The partner may have given up on this id before the photon got here.
    auto ts = tombstones_.find(id);
    if (ts != tombstones_.end()) {
        const RecordStatus status = ts->second;
        tombstones_.erase(ts);
        pending_.erase(id);
        ++counters_.stored;
        res.stored = true;
        res.tombstone_discard = status;
        resolved_[id] = status;
        resolved_age_.emplace_back(now, id);
        if (status == RecordStatus::discarded_gap) ++counters_.discarded_gap;
        else ++counters_.discarded_notified;
        // the announce still goes out; the partner counts it as late
        res.messages.push_back(make(MessageKind::announce, id, id, now));
        ++counters_.announces_sent;
        return res;
    }

    if (cfg_.buffer_capacity > 0 && occupancy() == cfg_.buffer_capacity) {
        if (cfg_.overflow == OverflowPolicy::drop_newest) {
            ++counters_.overflow_dropped;
            res.overflow_dropped = true;
            resolved_[id] = RecordStatus::discarded_overflow;
            resolved_age_.emplace_back(now, id);
            pending_.erase(id);
            // never stored, never announced; tell the partner to free its slot
            std::vector<EntanglementId> one{id};
            push_gap_discards(std::move(one), now, res.messages);
            return res;
        }
        // drop_oldest_unverified
        bool evicted = false;
        while (!store_order_.empty()) {
            const EntanglementId victim = store_order_.front();
            store_order_.pop_front();
            auto vit = records_.find(victim);
            if (vit == records_.end()) continue;  // already resolved; stale entry
            resolve(vit, RecordStatus::discarded_overflow, now);
            res.evicted = victim;
            res.messages.push_back(make(MessageKind::discard_notify, victim, victim, now));
            ++counters_.discard_notifies_sent;
            evicted = true;
            break;
        }
        if (!evicted) throw protocol_error("buffer full but nothing evictable");
    }

    QubitRecord rec;
    rec.id = id;
    rec.stored_at = now;
    rec.deadline = now + cfg_.timeout_ps;
    rec.status = RecordStatus::awaiting_partner;
    rec.slot = allocate_slot();
    records_.emplace(id, rec);
    store_order_.push_back(id);
    ++counters_.stored;
    res.stored = true;
    res.messages.push_back(make(MessageKind::announce, id, id, now));
    ++counters_.announces_sent;

    auto p = pending_.find(id);
    if (p != pending_.end()) {
        const PendingAnnounce pa = p->second;
        pending_.erase(p);
        // Consume only if our announce, under the symmetric-latency assumption
        // (observed delay = return delay), reaches the partner inside its
        // window. The partner runs the mirror-image test and reaches the same
        // verdict, so consumption is never one-sided.
        const TimePs d_obs = pa.received_at - pa.sent_at;
        if (now + d_obs < pa.sent_at + cfg_.timeout_ps) {
            auto rit = records_.find(id);
            rit->second.status = RecordStatus::verified;
            resolve(rit, RecordStatus::consumed, now);
            res.consumed = true;
        } else {
            ++counters_.cross_check_deferrals;
        }
    }
    return res;
}

std::vector<ControlMessage> NodeState::on_header_without_photon(EntanglementId id, TimePs now) {
    prune(now);
    if (records_.count(id) || resolved_.count(id)) {
        std::ostringstream os;
        os << "node " << id_ << ": header-without-photon for already-seen id " << id;
        throw protocol_error(os.str());
    }
    ++counters_.headers_without_photon;
    std::vector<ControlMessage> out;
    note_seen(id, now, out);
    known_lost_.insert(id);
    known_lost_age_.emplace_back(now, id);
    if (pending_.erase(id)) ++counters_.announces_for_lost;
    if (!tombstones_.count(id)) {
        std::vector<EntanglementId> one{id};
        push_gap_discards(std::move(one), now, out);
    }
    return out;
}

AnnounceResult NodeState::on_announce_received(const ControlMessage& msg, TimePs now) {
    prune(now);
    ++counters_.announces_received;
    AnnounceResult res;
    if (now < msg.sent_at)
        throw protocol_error("announce delivered before it was sent");

    auto it = records_.find(msg.id);
    if (it != records_.end()) {
        const TimePs d_obs = now - msg.sent_at;
        // (1) their announce reached us inside our window;
        // (2) ours reaches them inside theirs (symmetric-latency prediction).
        const bool own_window = now < it->second.deadline;
        const bool partner_window =
            it->second.stored_at + d_obs < msg.sent_at + cfg_.timeout_ps;
        if (own_window && partner_window) {
            it->second.status = RecordStatus::verified;
            resolve(it, RecordStatus::consumed, now);
            res.consumed = true;
        } else {
            ++counters_.cross_check_deferrals;
            res.deferred = true;  // the record will fall to its timeout
        }
        return res;
    }

    if (resolved_.count(msg.id) || tombstones_.count(msg.id)) {
        ++counters_.late_announces;
        res.late = true;
        return res;
    }
    if (known_lost_.count(msg.id)) {
        ++counters_.announces_for_lost;
        res.late = true;
        return res;
    }
    pending_[msg.id] = PendingAnnounce{msg.sent_at, now};
    pending_age_.emplace_back(now, msg.id);
    res.parked = true;
    return res;
}

TimeoutResult NodeState::on_timeout(EntanglementId id, TimePs now) {
    prune(now);
    TimeoutResult res;
    auto it = records_.find(id);
    if (it == records_.end()) return res;  // resolved before the timer fired
    if (now < it->second.deadline)
        throw protocol_error("timeout fired before the record's deadline");
    resolve(it, RecordStatus::discarded_timeout, now);
    res.discarded = true;
    res.messages.push_back(make(MessageKind::discard_notify, id, id, now));
    ++counters_.discard_notifies_sent;
    return res;
}

DiscardResult NodeState::on_discard_received(const ControlMessage& msg, TimePs now) {
    prune(now);
    DiscardResult res;
    const RecordStatus status = msg.kind == MessageKind::discard_notify
                                    ? RecordStatus::discarded_notified
                                    : RecordStatus::discarded_gap;
    for (EntanglementId id = msg.id; id <= msg.id_last; ++id) {
        ++counters_.discards_received;
        auto it = records_.find(id);
        if (it != records_.end()) {
            resolve(it, status, now);
            res.discarded.push_back(id);
        } else if (resolved_.count(id) || known_lost_.count(id)) {
            ++counters_.late_discards;
            ++res.late;
        } else {
            tombstones_[id] = status;
            tombstone_age_.emplace_back(now, id);
            pending_.erase(id);
            ++res.tombstoned;
        }
    }
    return res;
}

std::optional<QubitRecord> NodeState::record(EntanglementId id) const {
    auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

} // namespace entsim
