#include "entsim/serialize.hpp"

#include <charconv>
#include <cstdio>

#include "entsim/errors.hpp"

namespace entsim {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
    return std::string(buf, res.ptr);
}

namespace {

std::string time_field(TimePs t) { return format_double(to_seconds(t)); }

nlohmann::ordered_json counters_json(const NodeCounters& c) {
    nlohmann::ordered_json j;
    j["stored"] = c.stored;
    j["announces_sent"] = c.announces_sent;
    j["consumed"] = c.consumed;
    j["discarded_timeout"] = c.discarded_timeout;
    j["discarded_gap"] = c.discarded_gap;
    j["discarded_notified"] = c.discarded_notified;
    j["discarded_overflow"] = c.discarded_overflow;
    j["overflow_dropped"] = c.overflow_dropped;
    j["headers_without_photon"] = c.headers_without_photon;
    j["gap_discards_sent"] = c.gap_discards_sent;
    j["discard_notifies_sent"] = c.discard_notifies_sent;
    j["announces_received"] = c.announces_received;
    j["discards_received"] = c.discards_received;
    j["late_announces"] = c.late_announces;
    j["late_discards"] = c.late_discards;
    j["announces_for_lost"] = c.announces_for_lost;
    j["cross_check_deferrals"] = c.cross_check_deferrals;
    return j;
}

} // namespace

nlohmann::ordered_json report_to_json(const RunReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = "entangled-pair-run-report-v1";
    j["seed"] = rep.seed;
    j["duration_s"] = rep.duration_s;
    j["effective_source_rate_hz"] = rep.effective_source_rate_hz;
    j["timeout_s"] = rep.timeout_s;
    j["delta_tq_s"] = rep.delta_tq_s;
    j["pairs"] = {
        {"emitted", rep.pairs.emitted},       {"verified", rep.pairs.verified},
        {"lost", rep.pairs.lost},             {"overflow", rep.pairs.overflow},
        {"timed_out", rep.pairs.timed_out},   {"in_flight", rep.pairs.in_flight},
    };
    j["verified_rate_hz"] = rep.verified_rate_hz;

    nlohmann::ordered_json fj;
    fj["count"] = rep.fidelity.count;
    fj["mean"] = rep.fidelity.mean();
    fj["min"] = rep.fidelity.count ? rep.fidelity.min : 0.0;
    fj["max"] = rep.fidelity.count ? rep.fidelity.max : 0.0;
    fj["histogram_bin_width"] = rep.fidelity.bin_width;
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rep.fidelity.histogram.size(); ++i) {
        if (rep.fidelity.histogram[i] == 0) continue;
        bins.push_back({{"lower", static_cast<double>(i) * rep.fidelity.bin_width},
                        {"count", rep.fidelity.histogram[i]}});
    }
    fj["histogram"] = std::move(bins);
    j["fidelity"] = std::move(fj);

    nlohmann::ordered_json nodes;
    for (const auto& n : rep.nodes) {
        nlohmann::ordered_json nj = counters_json(n.counters);
        nj["occupancy_mean"] = n.occupancy_mean;
        nj["occupancy_max"] = n.occupancy_max;
        nj["max_record_lifetime_s"] = n.max_record_lifetime_s;
        nodes[n.id] = std::move(nj);
    }
    j["nodes"] = std::move(nodes);
    j["agreement"] = rep.agreement;
    j["messages"] = {
        {"announce_sent", rep.messages_sent[0]},
        {"discard_notify_sent", rep.messages_sent[1]},
        {"gap_discard_sent", rep.messages_sent[2]},
        {"delivered", rep.messages_delivered},
    };
    j["events_processed"] = rep.events_processed;
    return j;
}

void CsvTraceSink::on_event(TimePs at, const char* kind, const std::string& node,
                            std::optional<EntanglementId> id) {
    std::string row = time_field(at);
    row += ',';
    row += kind;
    row += ',';
    row += node;
    row += ',';
    if (id) row += std::to_string(*id);
    event_rows_.push_back(std::move(row));
}

void CsvTraceSink::on_message(MessageKind kind, EntanglementId id, const std::string& sender,
                              TimePs sent_at, TimePs delivered_at) {
    std::string row = to_string(kind);
    row += ',';
    row += std::to_string(id);
    row += ',';
    row += sender;
    row += ',';
    row += time_field(sent_at);
    row += ',';
    row += time_field(delivered_at);
    message_rows_.push_back(std::move(row));
}

void CsvTraceSink::write_events(std::ostream& os) const {
    os << "at_s,kind,node,id\n";
    for (const auto& r : event_rows_) os << r << '\n';
}

void CsvTraceSink::write_messages(std::ostream& os) const {
    os << "kind,id,sender,sent_at,delivered_at\n";
    for (const auto& r : message_rows_) os << r << '\n';
}

void write_fidelity_curve_csv(std::ostream& os, const std::vector<FidelityCurvePoint>& rows) {
    os << "technology,t_s,fidelity\n";
    for (const auto& r : rows)
        os << r.technology << ',' << format_double(r.t_s) << ',' << format_double(r.fidelity)
           << '\n';
}

void write_buffer_sweep_csv(std::ostream& os, const std::vector<BufferSweepRow>& rows) {
    os << "latency_s,node_a,node_b,occupancy_mean_a,occupancy_mean_b,"
          "occupancy_max_a,occupancy_max_b,verified\n";
    for (const auto& r : rows)
        os << format_double(r.latency_s) << ',' << r.node_a << ',' << r.node_b << ','
           << format_double(r.occupancy_mean_a) << ',' << format_double(r.occupancy_mean_b)
           << ',' << r.occupancy_max_a << ',' << r.occupancy_max_b << ',' << r.verified << '\n';
}

void write_rate_sweep_csv(std::ostream& os, const std::vector<RateSweepRow>& rows) {
    os << "fidelity_threshold,timeout_s,max_tolerable_latency_s,verified,verified_rate_hz\n";
    for (const auto& r : rows) {
        os << format_double(r.fidelity_threshold) << ',' << format_double(r.timeout_s) << ',';
        if (r.max_tolerable_latency_s)
            os << format_double(*r.max_tolerable_latency_s);
        else
            os << "unbounded";
        os << ',' << r.verified << ',' << format_double(r.verified_rate_hz) << '\n';
    }
}

} // namespace entsim
