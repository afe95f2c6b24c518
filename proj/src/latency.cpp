#include "entsim/latency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "entsim/errors.hpp"

namespace entsim {

LatencyModel LatencyModel::constant(double seconds) {
    if (!(seconds >= 0.0) || !std::isfinite(seconds))
        throw config_error("latency: constant delay must be >= 0 s");
    LatencyModel m;
    m.kind_ = Kind::constant;
    m.constant_ = seconds;
    return m;
}

LatencyModel LatencyModel::lognormal(double mu_log, double sigma_log) {
    if (!std::isfinite(mu_log) || !std::isfinite(sigma_log) || sigma_log < 0.0)
        throw config_error("latency: lognormal needs finite mu and sigma >= 0");
    LatencyModel m;
    m.kind_ = Kind::lognormal;
    m.mu_log_ = mu_log;
    m.sigma_log_ = sigma_log;
    return m;
}

LatencyModel LatencyModel::empirical(std::vector<double> samples_s) {
    if (samples_s.empty())
        throw config_error("latency: empirical model needs at least one sample");
    for (double s : samples_s)
        if (!(s > 0.0) || !std::isfinite(s))
            throw config_error("latency: empirical samples must be positive and finite");
    std::sort(samples_s.begin(), samples_s.end());
    LatencyModel m;
    m.kind_ = Kind::empirical;
    m.samples_ = std::move(samples_s);
    return m;
}

LatencyModel LatencyModel::empirical_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("latency: cannot open samples file '" + path + "'");
    std::vector<double> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string tok = line.substr(first, last - first + 1);
        try {
            std::size_t used = 0;
            const double ms = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            samples.push_back(ms * 1e-3);  // file is in milliseconds
        } catch (const std::exception&) {
            std::ostringstream os;
            os << "latency: bad sample at " << path << ":" << lineno << " ('" << tok << "')";
            throw config_error(os.str());
        }
    }
    if (samples.empty())
        throw config_error("latency: samples file '" + path + "' contains no data");
    return empirical(std::move(samples));
}

double LatencyModel::draw(Rng& rng) const {
    switch (kind_) {
        case Kind::constant:
            return constant_;
        case Kind::lognormal:
            return rng.lognormal(mu_log_, sigma_log_);
        case Kind::empirical: {
            // inverse CDF over the order statistics with linear interpolation;
            // u in [0,1) maps inside [min, max] only
            const double u = rng.uniform01();
            if (samples_.size() == 1) return samples_.front();
            const double pos = u * static_cast<double>(samples_.size() - 1);
            const auto i = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i);
            return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
        }
    }
    throw protocol_error("latency: unreachable model kind");
}

} // namespace entsim
