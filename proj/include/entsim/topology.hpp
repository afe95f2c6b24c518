#pragma once

#include <map>
#include <string>
#include <vector>

namespace entsim {

enum class NodeKind { source, intermediate, entangling };

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::intermediate;
    double insertion_loss_db = 0.0;
};

struct FiberLink {
    std::string a;
    std::string b;
    double length_km = 0.0;
    double attenuation_db_per_km = 0.2;
};

// One arm of the distribution tree: the unique source->terminal route.
struct QuantumPath {
    std::vector<NodeSpec> nodes;   // source first, terminal last
    std::vector<FiberLink> links;  // nodes.size() - 1 entries
    double total_loss_db = 0.0;
    double total_length_km = 0.0;
};

// Sum of fiber attenuation plus insertion loss of every traversed node.
double path_loss_db(const QuantumPath& path);

// 10^(-loss/10); loss must be >= 0.
double survival_probability(double loss_db);

// Photon flight time over the path's fiber at the given signal speed.
double arm_delay_s(const QuantumPath& path, double signal_speed_km_per_s);

// Static node/link graph. Validates on construction: ids unique, exactly one
// source, link endpoints known, losses and lengths non-negative.
class Topology {
public:
    Topology(std::vector<NodeSpec> nodes, std::vector<FiberLink> links);

    const std::string& source_id() const { return source_; }
    const NodeSpec& node(const std::string& id) const;
    bool has_node(const std::string& id) const { return index_.count(id) != 0; }
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const std::vector<FiberLink>& links() const { return links_; }

    // BFS route from the source; throws config_error if unreachable or if the
    // route is ambiguous (two shortest-hop routes).
    QuantumPath path_from_source(const std::string& terminal) const;

private:
    std::vector<NodeSpec> nodes_;
    std::vector<FiberLink> links_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> adj_;  // node -> (neighbor idx, link idx)
    std::string source_;
};

} // namespace entsim
