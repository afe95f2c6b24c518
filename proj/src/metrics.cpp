#include "entsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entsim/errors.hpp"

namespace entsim {

void OccupancyTracker::sample(TimePs now, std::uint32_t occupancy) {
    if (!started_) {
        // occupancy is 0 from t=0 until the first sample
        started_ = true;
        last_t_ = 0;
        last_occ_ = 0;
    }
    if (now < last_t_)
        throw protocol_error("occupancy sampled with a non-monotonic clock");
    integral_ps_ += static_cast<double>(last_occ_) * static_cast<double>(now - last_t_);
    last_t_ = now;
    last_occ_ = occupancy;
    max_ = std::max(max_, occupancy);
}

void OccupancyTracker::finalize(TimePs end) {
    if (!started_) {
        last_t_ = end;
        started_ = true;
        return;
    }
    if (end < last_t_) return;
    integral_ps_ += static_cast<double>(last_occ_) * static_cast<double>(end - last_t_);
    last_t_ = end;
}

double OccupancyTracker::mean(double duration_s) const {
    if (!(duration_s > 0.0)) return 0.0;
    return integral_s() / duration_s;
}

void FidelityStats::configure(double width) {
    if (!(width > 0.0 && width <= 1.0))
        throw std::invalid_argument("fidelity histogram bin width must be in (0, 1]");
    bin_width = width;
    histogram.assign(static_cast<std::size_t>(std::ceil(1.0 / width)), 0);
}

void FidelityStats::add(double f) {
    if (histogram.empty()) configure(bin_width);
    ++count;
    sum += f;
    min = std::min(min, f);
    max = std::max(max, f);
    auto bin = static_cast<std::size_t>(f / bin_width);
    if (bin >= histogram.size()) bin = histogram.size() - 1;  // f == 1.0 lands in the top bin
    ++histogram[bin];
}

void RunReport::check_conservation() const {
    const std::uint64_t total = pairs.verified + pairs.lost + pairs.overflow +
                                pairs.timed_out + pairs.in_flight;
    if (total != pairs.emitted) {
        std::ostringstream os;
        os << "pair-fate conservation broken: emitted " << pairs.emitted << " but fates sum to "
           << total << " (verified " << pairs.verified << ", lost " << pairs.lost
           << ", overflow " << pairs.overflow << ", timed_out " << pairs.timed_out
           << ", in_flight " << pairs.in_flight << ")";
        throw protocol_error(os.str());
    }
    if (fidelity.count != pairs.verified)
        throw protocol_error("fidelity sample count does not match verified pairs");
}

} // namespace entsim
