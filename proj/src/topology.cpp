#include "entsim/topology.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "entsim/errors.hpp"

namespace entsim {

double path_loss_db(const QuantumPath& path) {
    double loss = 0.0;
    for (const auto& n : path.nodes) loss += n.insertion_loss_db;
    for (const auto& l : path.links) loss += l.length_km * l.attenuation_db_per_km;
    return loss;
}

double survival_probability(double loss_db) {
    if (!(loss_db >= 0.0))
        throw std::invalid_argument("survival_probability: loss must be >= 0 dB");
    return std::pow(10.0, -loss_db / 10.0);
}

double arm_delay_s(const QuantumPath& path, double signal_speed_km_per_s) {
    if (!(signal_speed_km_per_s > 0.0))
        throw std::invalid_argument("arm_delay_s: signal speed must be positive");
    return path.total_length_km / signal_speed_km_per_s;
}

Topology::Topology(std::vector<NodeSpec> nodes, std::vector<FiberLink> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
    if (nodes_.empty()) throw config_error("topology: no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.id.empty()) throw config_error("topology: node with empty id");
        if (!index_.emplace(n.id, i).second)
            throw config_error("topology: duplicate node id '" + n.id + "'");
        if (!(n.insertion_loss_db >= 0.0) || !std::isfinite(n.insertion_loss_db))
            throw config_error("topology: node '" + n.id + "' has negative insertion loss");
        if (n.kind == NodeKind::source) {
            if (!source_.empty())
                throw config_error("topology: more than one source node ('" + source_ +
                                   "', '" + n.id + "')");
            source_ = n.id;
        }
    }
    if (source_.empty()) throw config_error("topology: no source node");

    for (std::size_t i = 0; i < links_.size(); ++i) {
        const auto& l = links_[i];
        auto ia = index_.find(l.a);
        auto ib = index_.find(l.b);
        if (ia == index_.end() || ib == index_.end())
            throw config_error("topology: link references unknown node '" +
                               (ia == index_.end() ? l.a : l.b) + "'");
        if (l.a == l.b)
            throw config_error("topology: self-loop at '" + l.a + "'");
        if (!(l.length_km >= 0.0) || !std::isfinite(l.length_km))
            throw config_error("topology: link " + l.a + "-" + l.b + " has negative length");
        if (!(l.attenuation_db_per_km >= 0.0) || !std::isfinite(l.attenuation_db_per_km))
            throw config_error("topology: link " + l.a + "-" + l.b +
                               " has negative attenuation");
        adj_[l.a].emplace_back(ib->second, i);
        adj_[l.b].emplace_back(ia->second, i);
    }
}

const NodeSpec& Topology::node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw config_error("topology: unknown node '" + id + "'");
    return nodes_[it->second];
}

QuantumPath Topology::path_from_source(const std::string& terminal) const {
    node(terminal);  // existence check
    // BFS with parent tracking; flag ambiguity if a node is reachable two ways
    // at the same depth.
    const std::size_t n = nodes_.size();
    const std::size_t src = index_.at(source_);
    const std::size_t dst = index_.at(terminal);
    constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(n, kUnset), via_link(n, kUnset), depth(n, kUnset);
    std::vector<bool> ambiguous(n, false);

    std::deque<std::size_t> frontier{src};
    depth[src] = 0;
    while (!frontier.empty()) {
        const std::size_t cur = frontier.front();
        frontier.pop_front();
        auto it = adj_.find(nodes_[cur].id);
        if (it == adj_.end()) continue;
        for (const auto& [nb, link] : it->second) {
            if (depth[nb] == kUnset) {
                depth[nb] = depth[cur] + 1;
                parent[nb] = cur;
                via_link[nb] = link;
                ambiguous[nb] = ambiguous[cur];
                frontier.push_back(nb);
            } else if (depth[nb] == depth[cur] + 1) {
                ambiguous[nb] = true;
            }
        }
    }

    if (depth[dst] == kUnset)
        throw config_error("topology: node '" + terminal + "' is not connected to source '" +
                           source_ + "'");
    if (ambiguous[dst]) {
        std::ostringstream os;
        os << "topology: route from '" << source_ << "' to '" << terminal
           << "' is ambiguous (multiple shortest paths)";
        throw config_error(os.str());
    }

    QuantumPath path;
    std::vector<std::size_t> chain;
    for (std::size_t cur = dst; cur != kUnset; cur = parent[cur]) chain.push_back(cur);
    for (auto it2 = chain.rbegin(); it2 != chain.rend(); ++it2) {
        path.nodes.push_back(nodes_[*it2]);
        if (via_link[*it2] != kUnset && *it2 != src)
            path.links.push_back(links_[via_link[*it2]]);
    }
    path.total_loss_db = path_loss_db(path);
    for (const auto& l : path.links) path.total_length_km += l.length_km;
    return path;
}

} // namespace entsim
