#include "entsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "entsim/errors.hpp"
#include "entsim/rng.hpp"

namespace entsim {

void RunConfig::validate() const {
    if (!topology) throw config_error("run: topology is required");
    if (node_a.empty() || node_b.empty() || node_a == node_b)
        throw config_error("run: need two distinct pair nodes");
    for (const std::string* n : {&node_a, &node_b}) {
        const NodeSpec& spec = topology->node(*n);
        if (spec.kind != NodeKind::entangling)
            throw config_error("run: pair node '" + *n + "' is not an entangling node");
    }
    if (!(signal_speed_km_per_s > 0.0))
        throw config_error("run: signal speed must be positive");
    technology.validate();
    if (std::isnan(fidelity_threshold) || fidelity_threshold > 1.0 || fidelity_threshold <= 0.5)
        throw config_error("run: fidelity threshold must be in (0.5, 1]");
    if (timeout_override_s && !(*timeout_override_s > 0.0))
        throw config_error("run: timeout override must be positive");
    if (!(source_rate_hz > 0.0) || source_rate_hz > 1e12)
        throw config_error("run: source rate must be in (0, 1e12] Hz");
    if (pair_count.has_value() == duration_s.has_value())
        throw config_error("run: set exactly one of pair_count / duration_s");
    if (pair_count && *pair_count == 0) throw config_error("run: pair_count must be > 0");
    if (duration_s && !(*duration_s > 0.0)) throw config_error("run: duration must be > 0");
    if (gap_guard_s && *gap_guard_s < 0.0) throw config_error("run: gap guard must be >= 0");
    if (!(prune_horizon_timeouts >= 1.0))
        throw config_error("run: prune horizon must be >= 1 timeout");
    if (!(histogram_bin_width > 0.0 && histogram_bin_width <= 1.0))
        throw config_error("run: histogram bin width must be in (0, 1]");
}

ExposureIntervals verification_exposure(TimePs t_store_a, TimePs t_store_b,
                                        TimePs t_verify_a, TimePs t_verify_b) {
    if (t_verify_a < t_store_a || t_verify_b < t_store_b)
        throw protocol_error("verification_exposure: verify instant precedes store instant");
    // the pair is usable only once the slower side has confirmed
    const TimePs t_pair = std::max(t_verify_a, t_verify_b);
    return {to_seconds(t_pair - t_store_a), to_seconds(t_pair - t_store_b)};
}

namespace {

enum class EvKind : std::uint8_t {
    emit_pair, photon_arrival, photon_lost, message_delivery, timeout_expiry, end_of_run
};

const char* to_string(EvKind k) {
    switch (k) {
        case EvKind::emit_pair: return "emit_pair";
        case EvKind::photon_arrival: return "photon_arrival";
        case EvKind::photon_lost: return "photon_lost";
        case EvKind::message_delivery: return "message_delivery";
        case EvKind::timeout_expiry: return "timeout_expiry";
        case EvKind::end_of_run: return "end_of_run";
    }
    return "?";
}

struct Ev {
    TimePs at = 0;
    std::uint64_t seq = 0;  // tie-break: schedule order
    EvKind kind = EvKind::end_of_run;
    int node = -1;
    EntanglementId id = 0;
    ControlMessage msg;
};

struct EvAfter {
    bool operator()(const Ev& x, const Ev& y) const {
        return std::tie(x.at, x.seq) > std::tie(y.at, y.seq);
    }
};

enum class ArmDisp : std::uint8_t {
    unresolved, consumed, timed_out, gap_discarded, notify_discarded, overflow, lost
};

struct ArmState {
    ArmDisp disp = ArmDisp::unresolved;
    TimePs stored_at = 0;
    TimePs verified_at = 0;
    bool stored = false;
};

struct PairState {
    ArmState arm[2];
    int resolved = 0;
};

ArmDisp disp_from_status(RecordStatus s) {
    switch (s) {
        case RecordStatus::consumed: return ArmDisp::consumed;
        case RecordStatus::discarded_timeout: return ArmDisp::timed_out;
        case RecordStatus::discarded_gap: return ArmDisp::gap_discarded;
        case RecordStatus::discarded_notified: return ArmDisp::notify_discarded;
        case RecordStatus::discarded_overflow: return ArmDisp::overflow;
        default: throw protocol_error("unexpected record status at arm resolution");
    }
}

class Engine {
public:
    Engine(const RunConfig& cfg, TraceSink* trace) : cfg_(cfg), trace_(trace) {
        cfg_.validate();
        path_[0] = cfg_.topology->path_from_source(cfg_.node_a);
        path_[1] = cfg_.topology->path_from_source(cfg_.node_b);
        for (int i = 0; i < 2; ++i) {
            flight_[i] = to_ps(arm_delay_s(path_[i], cfg_.signal_speed_km_per_s));
            survival_[i] = survival_probability(path_[i].total_loss_db);
        }
        delta_tq_ = std::abs(flight_[0] - flight_[1]);

        const double timeout_s = cfg_.timeout_override_s
            ? *cfg_.timeout_override_s
            : timeout_from_threshold(cfg_.fidelity_threshold, cfg_.technology);
        timeout_ps_ = to_ps(timeout_s);
        if (timeout_ps_ <= 0) throw config_error("run: timeout rounds to zero picoseconds");

        period_ps_ = static_cast<TimePs>(std::llround(1e12 / cfg_.source_rate_hz));
        if (period_ps_ < 1) period_ps_ = 1;
        if (cfg_.pair_count) {
            emit_limit_ = *cfg_.pair_count;
            emission_end_ = static_cast<TimePs>(emit_limit_) * period_ps_;
        } else {
            emission_end_ = to_ps(*cfg_.duration_s);
            emit_limit_ = static_cast<std::uint64_t>(
                (emission_end_ + period_ps_ - 1) / period_ps_);
        }

        ProtocolConfig pcfg;
        pcfg.timeout_ps = timeout_ps_;
        pcfg.gap_guard_ps = cfg_.gap_guard_s ? to_ps(*cfg_.gap_guard_s) : delta_tq_;
        pcfg.buffer_capacity = cfg_.buffer_capacity;
        pcfg.overflow = cfg_.overflow_policy;
        pcfg.prune_horizon_ps =
            static_cast<TimePs>(cfg_.prune_horizon_timeouts * static_cast<double>(timeout_ps_));
        pcfg.gap_batching = cfg_.gap_batching;
        nodes_.emplace_back(cfg_.node_a, pcfg);
        nodes_.emplace_back(cfg_.node_b, pcfg);
    }

    RunReport run() {
        Rng loss_rng(mix_seed(cfg_.seed, 1));
        latency_rng_ = std::make_unique<Rng>(mix_seed(cfg_.seed, 2));
        fid_.configure(cfg_.histogram_bin_width);

        push({0, 0, EvKind::emit_pair, -1, 0, {}});
        push({emission_end_, 0, EvKind::end_of_run, -1, 0, {}});

        TimePs last_at = 0;
        while (!queue_.empty()) {
            const Ev ev = queue_.top();
            queue_.pop();
            ++events_processed_;
            last_at = std::max(last_at, ev.at);
            switch (ev.kind) {
                case EvKind::emit_pair: handle_emit(ev, loss_rng); break;
                case EvKind::photon_arrival: handle_arrival(ev); break;
                case EvKind::photon_lost: handle_lost(ev); break;
                case EvKind::message_delivery: handle_delivery(ev); break;
                case EvKind::timeout_expiry: handle_timeout(ev); break;
                case EvKind::end_of_run:
                    trace_event(ev.at, to_string(ev.kind), cfg_.topology->source_id(), std::nullopt);
                    end_seen_ = true;
                    break;
            }
        }
        if (!end_seen_)
            throw config_error("run: event queue exhausted before the end condition");

        return assemble(last_at);
    }

private:
    void push(Ev ev) {
        ev.seq = next_seq_++;
        queue_.push(std::move(ev));
    }

    void trace_event(TimePs at, const char* kind, const std::string& node,
                     std::optional<EntanglementId> id) {
        if (trace_) trace_->on_event(at, kind, node, id);
    }

    TimePs delay_for(const ControlMessage& msg) {
        if (cfg_.latency_policy == LatencyPolicy::max_shared) {
            auto [it, fresh] = shared_delay_.try_emplace(msg.id, 0);
            if (fresh) it->second = to_ps(cfg_.latency.draw(*latency_rng_));
            return it->second;
        }
        return to_ps(cfg_.latency.draw(*latency_rng_));
    }

    void send(int from, std::vector<ControlMessage>&& msgs) {
        for (auto& m : msgs) {
            const TimePs deliver_at = m.sent_at + delay_for(m);
            ++messages_sent_[static_cast<int>(m.kind)];
            Ev ev;
            ev.at = deliver_at;
            ev.kind = EvKind::message_delivery;
            ev.node = 1 - from;
            ev.id = m.id;
            ev.msg = std::move(m);
            push(std::move(ev));
        }
    }

    void sample_occupancy(int node, TimePs now) {
        occ_[node].sample(now, nodes_[node].occupancy());
    }

    void resolve_arm(int node, EntanglementId id, ArmDisp disp, TimePs verified_at = 0) {
        auto it = pairs_.find(id);
        if (it == pairs_.end())
            throw protocol_error("engine: arm resolution for unknown pair id");
        ArmState& arm = it->second.arm[node];
        if (arm.disp != ArmDisp::unresolved)
            throw protocol_error("engine: arm resolved twice");
        arm.disp = disp;
        arm.verified_at = verified_at;
        if (++it->second.resolved == 2) finalize(it);
    }

    void finalize(std::unordered_map<EntanglementId, PairState>::iterator it) {
        const PairState& p = it->second;
        const ArmState& a = p.arm[0];
        const ArmState& b = p.arm[1];
        const bool any_lost = a.disp == ArmDisp::lost || b.disp == ArmDisp::lost;
        const bool any_overflow = a.disp == ArmDisp::overflow || b.disp == ArmDisp::overflow;
        if (any_lost) {
            ++fates_.lost;
        } else if (any_overflow) {
            ++fates_.overflow;
        } else if (a.disp == ArmDisp::consumed && b.disp == ArmDisp::consumed) {
            ++fates_.verified;
            const ExposureIntervals tau = verification_exposure(
                a.stored_at, b.stored_at, a.verified_at, b.verified_at);
            fid_.add(closed_form_fidelity(tau, cfg_.technology, cfg_.convention));
        } else {
            ++fates_.timed_out;
        }
        shared_delay_.erase(it->first);
        pairs_.erase(it);
    }

    void handle_emit(const Ev& ev, Rng& loss_rng) {
        const EntanglementId id = ev.id;
        trace_event(ev.at, to_string(ev.kind), cfg_.topology->source_id(), id);
        ++fates_.emitted;
        pairs_.emplace(id, PairState{});
        for (int arm = 0; arm < 2; ++arm) {
            const bool survives = loss_rng.uniform01() < survival_[arm];
            Ev next;
            next.at = ev.at + flight_[arm];
            next.kind = survives ? EvKind::photon_arrival : EvKind::photon_lost;
            next.node = arm;
            next.id = id;
            push(std::move(next));
        }
        if (id + 1 < emit_limit_) {
            Ev next;
            next.at = ev.at + period_ps_;
            next.kind = EvKind::emit_pair;
            next.id = id + 1;
            push(std::move(next));
        }
    }

    void handle_arrival(const Ev& ev) {
        const int n = ev.node;
        trace_event(ev.at, to_string(ev.kind), nodes_[n].id(), ev.id);
        StoreResult res = nodes_[n].on_photon_stored(ev.id, ev.at);
        if (res.evicted) resolve_arm(n, *res.evicted, ArmDisp::overflow);
        if (res.tombstone_discard) {
            resolve_arm(n, ev.id, disp_from_status(*res.tombstone_discard));
        } else if (res.overflow_dropped) {
            resolve_arm(n, ev.id, ArmDisp::overflow);
        } else if (res.stored) {
            pairs_.at(ev.id).arm[n].stored = true;
            pairs_.at(ev.id).arm[n].stored_at = ev.at;
            if (res.consumed) {
                resolve_arm(n, ev.id, ArmDisp::consumed, ev.at);
            } else {
                Ev tmo;
                tmo.at = ev.at + timeout_ps_;
                tmo.kind = EvKind::timeout_expiry;
                tmo.node = n;
                tmo.id = ev.id;
                push(std::move(tmo));
            }
        }
        send(n, std::move(res.messages));
        sample_occupancy(n, ev.at);
    }

    void handle_lost(const Ev& ev) {
        const int n = ev.node;
        trace_event(ev.at, to_string(ev.kind), nodes_[n].id(), ev.id);
        auto msgs = nodes_[n].on_header_without_photon(ev.id, ev.at);
        // send before resolving: a finalizing pair must keep its shared delay
        // for this last message, or sweep rows lose their common draw stream
        send(n, std::move(msgs));
        resolve_arm(n, ev.id, ArmDisp::lost);
    }

    void handle_delivery(const Ev& ev) {
        const int n = ev.node;
        ++messages_delivered_;
        if (trace_) {
            for (EntanglementId id = ev.msg.id; id <= ev.msg.id_last; ++id)
                trace_->on_message(ev.msg.kind, id, ev.msg.sender, ev.msg.sent_at, ev.at);
        }
        trace_event(ev.at, to_string(ev.kind), nodes_[n].id(), ev.msg.id);
        if (ev.msg.kind == MessageKind::announce) {
            const AnnounceResult res = nodes_[n].on_announce_received(ev.msg, ev.at);
            if (res.consumed) {
                resolve_arm(n, ev.msg.id, ArmDisp::consumed, ev.at);
                sample_occupancy(n, ev.at);
            }
        } else {
            const DiscardResult res = nodes_[n].on_discard_received(ev.msg, ev.at);
            const ArmDisp disp = ev.msg.kind == MessageKind::discard_notify
                                     ? ArmDisp::notify_discarded
                                     : ArmDisp::gap_discarded;
            for (EntanglementId id : res.discarded) resolve_arm(n, id, disp);
            if (!res.discarded.empty()) sample_occupancy(n, ev.at);
        }
    }

    void handle_timeout(const Ev& ev) {
        const int n = ev.node;
        TimeoutResult res = nodes_[n].on_timeout(ev.id, ev.at);
        if (!res.discarded) return;  // record resolved before the timer fired
        trace_event(ev.at, to_string(ev.kind), nodes_[n].id(), ev.id);
        send(n, std::move(res.messages));  // before resolve: see handle_lost
        resolve_arm(n, ev.id, ArmDisp::timed_out);
        sample_occupancy(n, ev.at);
    }

    RunReport assemble(TimePs last_at) {
        RunReport rep;
        rep.seed = cfg_.seed;
        rep.duration_s = to_seconds(emission_end_);
        rep.effective_source_rate_hz = kPsPerSecond / static_cast<double>(period_ps_);
        rep.timeout_s = to_seconds(timeout_ps_);
        rep.delta_tq_s = to_seconds(delta_tq_);
        rep.pairs = fates_;
        rep.pairs.in_flight = pairs_.size();
        rep.verified_rate_hz = static_cast<double>(fates_.verified) / rep.duration_s;
        rep.fidelity = fid_;
        rep.events_processed = events_processed_;
        rep.messages_delivered = messages_delivered_;
        for (int k = 0; k < 3; ++k) rep.messages_sent[k] = messages_sent_[k];
        for (int i = 0; i < 2; ++i) {
            occ_[i].finalize(last_at);
            NodeReport nr;
            nr.id = nodes_[i].id();
            nr.counters = nodes_[i].counters();
            nr.occupancy_mean = occ_[i].mean(rep.duration_s);
            nr.occupancy_max = occ_[i].max();
            nr.max_record_lifetime_s = to_seconds(nodes_[i].max_record_lifetime_ps());
            rep.nodes.push_back(std::move(nr));
        }
        // agreement: the two consumed-id sets must be identical
        std::vector<EntanglementId> ca = nodes_[0].consumed_ids();
        std::vector<EntanglementId> cb = nodes_[1].consumed_ids();
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        rep.agreement = ca == cb;
        rep.check_conservation();
        return rep;
    }

    RunConfig cfg_;
    TraceSink* trace_ = nullptr;

    QuantumPath path_[2];
    TimePs flight_[2] = {0, 0};
    double survival_[2] = {1.0, 1.0};
    TimePs delta_tq_ = 0;
    TimePs timeout_ps_ = 0;
    TimePs period_ps_ = 1;
    TimePs emission_end_ = 0;
    std::uint64_t emit_limit_ = 0;

    std::vector<NodeState> nodes_;
    std::priority_queue<Ev, std::vector<Ev>, EvAfter> queue_;
    std::uint64_t next_seq_ = 0;
    std::unique_ptr<Rng> latency_rng_;
    std::unordered_map<EntanglementId, PairState> pairs_;
    std::unordered_map<EntanglementId, TimePs> shared_delay_;
    OccupancyTracker occ_[2];
    FidelityStats fid_;
    PairFates fates_;
    std::uint64_t messages_sent_[3] = {0, 0, 0};
    std::uint64_t messages_delivered_ = 0;
    std::uint64_t events_processed_ = 0;
    bool end_seen_ = false;
};

} // namespace

RunReport run_simulation(const RunConfig& cfg, TraceSink* trace) {
    Engine engine(cfg, trace);
    return engine.run();
}

} // namespace entsim
