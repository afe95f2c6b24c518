#pragma once

#include <string>
#include <vector>

#include "entsim/rng.hpp"

namespace entsim {

// How the two directions of a message exchange relate:
//   iid        : every message draws its own delay
//   max_shared : both messages of one entangled-pair exchange share a single
//                draw (symmetric-latency assumption). Default.
enum class LatencyPolicy { iid, max_shared };

// One-way classical network delay model. Draws are in seconds and > 0
// (constant 0 is permitted as a degenerate test mode).
class LatencyModel {
public:
    enum class Kind { constant, lognormal, empirical };

    static LatencyModel constant(double seconds);
    static LatencyModel lognormal(double mu_log, double sigma_log);
    // samples in seconds; sorted internally. Draws by inverse-CDF with linear
    // interpolation between order statistics — never extrapolates beyond
    // [min, max] of the data.
    static LatencyModel empirical(std::vector<double> samples_s);
    // text file, one latency in milliseconds per line, '#' starts a comment
    static LatencyModel empirical_from_file(const std::string& path);

    double draw(Rng& rng) const;

    Kind kind() const { return kind_; }
    double constant_s() const { return constant_; }
    double mu_log() const { return mu_log_; }
    double sigma_log() const { return sigma_log_; }
    const std::vector<double>& samples() const { return samples_; }

private:
    LatencyModel() = default;
    Kind kind_ = Kind::constant;
    double constant_ = 0.0;
    double mu_log_ = 0.0;
    double sigma_log_ = 0.0;
    std::vector<double> samples_;
};

} // namespace entsim
