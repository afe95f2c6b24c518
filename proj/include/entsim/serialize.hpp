#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entsim/engine.hpp"
#include "entsim/experiments.hpp"
#include "entsim/metrics.hpp"

namespace entsim {

nlohmann::ordered_json report_to_json(const RunReport& report);

// TraceSink that buffers rows and writes the two trace CSVs:
//   events:   at_s,kind,node,id        (id empty when not applicable)
//   messages: kind,id,sender,sent_at,delivered_at   (times in seconds)
class CsvTraceSink : public TraceSink {
public:
    void on_event(TimePs at, const char* kind, const std::string& node,
                  std::optional<EntanglementId> id) override;
    void on_message(MessageKind kind, EntanglementId id, const std::string& sender,
                    TimePs sent_at, TimePs delivered_at) override;

    void write_events(std::ostream& os) const;
    void write_messages(std::ostream& os) const;

private:
    std::vector<std::string> event_rows_;
    std::vector<std::string> message_rows_;
};

void write_fidelity_curve_csv(std::ostream& os, const std::vector<FidelityCurvePoint>& rows);
void write_buffer_sweep_csv(std::ostream& os, const std::vector<BufferSweepRow>& rows);
void write_rate_sweep_csv(std::ostream& os, const std::vector<RateSweepRow>& rows);

// shortest-exact float formatting shared by every CSV writer
std::string format_double(double v);

} // namespace entsim
