#include "entsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "entsim/errors.hpp"

namespace entsim {

namespace {

using json = ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw config_error("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (!k.empty() && k[0] == '_') continue;  // comment key, ignored
        bool ok = false;
        for (const char* a : allowed)
            if (k == a) { ok = true; break; }
        if (!ok) fail(path + k, "unknown key");
    }
}

double need_num(const json& o, const std::string& path, const char* key) {
    if (!o.contains(key)) fail(path + key, "missing required number");
    const auto& v = o.at(key);
    if (!v.is_number()) fail(path + key, "expected a number");
    return v.get<double>();
}

double num_or(const json& o, const std::string& path, const char* key, double fallback) {
    if (!o.contains(key)) return fallback;
    const auto& v = o.at(key);
    if (!v.is_number()) fail(path + key, "expected a number");
    return v.get<double>();
}

std::uint64_t uint_or(const json& o, const std::string& path, const char* key,
                      std::uint64_t fallback) {
    if (!o.contains(key)) return fallback;
    const auto& v = o.at(key);
    if (!v.is_number_unsigned()) fail(path + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string need_str(const json& o, const std::string& path, const char* key) {
    if (!o.contains(key)) fail(path + key, "missing required string");
    const auto& v = o.at(key);
    if (!v.is_string()) fail(path + key, "expected a string");
    return v.get<std::string>();
}

std::string str_or(const json& o, const std::string& path, const char* key,
                   const std::string& fallback) {
    if (!o.contains(key)) return fallback;
    const auto& v = o.at(key);
    if (!v.is_string()) fail(path + key, "expected a string");
    return v.get<std::string>();
}

bool bool_or(const json& o, const std::string& path, const char* key, bool fallback) {
    if (!o.contains(key)) return fallback;
    const auto& v = o.at(key);
    if (!v.is_boolean()) fail(path + key, "expected true/false");
    return v.get<bool>();
}

std::vector<double> num_array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) fail(path, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

double default_insertion_loss(NodeKind kind) {
    // source and memory terminals carry coupling optics; switching points are
    // the lossier multiplexer stages
    return kind == NodeKind::intermediate ? 8.0 : 4.0;
}

NodeKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "source") return NodeKind::source;
    if (s == "intermediate") return NodeKind::intermediate;
    if (s == "entangling") return NodeKind::entangling;
    fail(path, "unknown node kind '" + s + "' (source|intermediate|entangling)");
}

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::source: return "source";
        case NodeKind::intermediate: return "intermediate";
        case NodeKind::entangling: return "entangling";
    }
    return "?";
}

} // namespace

LoadedConfig load_config(const ordered_json& root, const std::string& base_dir) {
    LoadedConfig out;
    RunConfig& cfg = out.run;
    json echo;

    check_keys(root, "",
               {"run", "memory", "decoherence", "latency", "protocol", "topology", "sweep"});
    for (const char* required : {"run", "memory", "topology"})
        if (!root.contains(required))
            fail(required, "missing required section");

    // ---- run ----
    {
        const json& r = root.at("run");
        const std::string p = "run.";
        check_keys(r, p, {"pair_count", "duration_s", "source_rate_hz", "seed",
                          "buffer_capacity", "overflow_policy", "histogram_bin_width"});
        if (r.contains("pair_count") == r.contains("duration_s"))
            fail("run", "set exactly one of pair_count / duration_s");
        if (r.contains("pair_count")) cfg.pair_count = uint_or(r, p, "pair_count", 0);
        if (r.contains("duration_s")) cfg.duration_s = need_num(r, p, "duration_s");
        cfg.source_rate_hz = need_num(r, p, "source_rate_hz");
        cfg.seed = uint_or(r, p, "seed", 1);
        cfg.buffer_capacity = static_cast<std::uint32_t>(uint_or(r, p, "buffer_capacity", 0));
        const std::string ov = str_or(r, p, "overflow_policy", "drop-newest");
        if (ov == "drop-newest") cfg.overflow_policy = OverflowPolicy::drop_newest;
        else if (ov == "drop-oldest-unverified")
            cfg.overflow_policy = OverflowPolicy::drop_oldest_unverified;
        else fail(p + "overflow_policy", "expected drop-newest|drop-oldest-unverified");
        cfg.histogram_bin_width = num_or(r, p, "histogram_bin_width", 0.01);

        echo["run"] = json::object();
        if (cfg.pair_count) echo["run"]["pair_count"] = *cfg.pair_count;
        if (cfg.duration_s) echo["run"]["duration_s"] = *cfg.duration_s;
        echo["run"]["source_rate_hz"] = cfg.source_rate_hz;
        echo["run"]["seed"] = cfg.seed;
        echo["run"]["buffer_capacity"] = cfg.buffer_capacity;
        echo["run"]["overflow_policy"] = ov;
        echo["run"]["histogram_bin_width"] = cfg.histogram_bin_width;
    }

    // ---- memory ----
    {
        const json& m = root.at("memory");
        const std::string p = "memory.";
        check_keys(m, p, {"technology", "name", "t1_s", "t2_s"});
        if (m.contains("technology")) {
            if (m.contains("name") || m.contains("t1_s") || m.contains("t2_s"))
                fail("memory", "give either technology or name/t1_s/t2_s, not both");
            cfg.technology = technology(need_str(m, p, "technology"));
            echo["memory"]["technology"] = cfg.technology.id;
        } else {
            MemoryTechnology custom;
            custom.id = str_or(m, p, "name", "custom");
            custom.display_name = custom.id;
            custom.t1_s = need_num(m, p, "t1_s");
            custom.t2_s = need_num(m, p, "t2_s");
            try {
                custom.validate();
            } catch (const std::invalid_argument& e) {
                fail("memory", e.what());
            }
            cfg.technology = custom;
            echo["memory"]["name"] = custom.id;
            echo["memory"]["t1_s"] = custom.t1_s;
            echo["memory"]["t2_s"] = custom.t2_s;
        }
    }

    // ---- decoherence ----
    {
        json d = root.contains("decoherence") ? root.at("decoherence") : json::object();
        const std::string p = "decoherence.";
        check_keys(d, p, {"convention", "fidelity_threshold", "timeout_override_s"});
        const std::string conv = str_or(d, p, "convention", "t2-calibrated");
        if (conv == "t2-calibrated") cfg.convention = DephasingConvention::t2_calibrated;
        else if (conv == "t2-literal") cfg.convention = DephasingConvention::t2_literal;
        else fail(p + "convention", "expected t2-calibrated|t2-literal");
        cfg.fidelity_threshold = num_or(d, p, "fidelity_threshold", 0.81);
        if (d.contains("timeout_override_s"))
            cfg.timeout_override_s = need_num(d, p, "timeout_override_s");

        echo["decoherence"]["convention"] = conv;
        echo["decoherence"]["fidelity_threshold"] = cfg.fidelity_threshold;
        if (cfg.timeout_override_s)
            echo["decoherence"]["timeout_override_s"] = *cfg.timeout_override_s;
    }

    // ---- latency ----
    {
        json l = root.contains("latency") ? root.at("latency") : json::object();
        const std::string p = "latency.";
        check_keys(l, p, {"model", "constant_s", "median_s", "sigma", "samples_file",
                          "samples_ms", "samples_s", "policy"});
        const std::string model = str_or(l, p, "model", "lognormal");
        echo["latency"]["model"] = model;
        if (model == "constant") {
            const double c = need_num(l, p, "constant_s");
            cfg.latency = LatencyModel::constant(c);
            echo["latency"]["constant_s"] = c;
        } else if (model == "lognormal") {
            const double median = num_or(l, p, "median_s", 0.010);
            const double sigma = num_or(l, p, "sigma", 0.35);  // artifact default
            if (!(median > 0.0)) fail(p + "median_s", "must be > 0");
            cfg.latency = LatencyModel::lognormal(std::log(median), sigma);
            echo["latency"]["_note"] =
                "sigma 0.35 is an artifact default (typical metro jitter), not a measured value";
            echo["latency"]["median_s"] = median;
            echo["latency"]["sigma"] = sigma;
        } else if (model == "empirical") {
            const int sources = int(l.contains("samples_file")) + int(l.contains("samples_ms")) +
                                int(l.contains("samples_s"));
            if (sources != 1)
                fail("latency", "empirical model needs exactly one of samples_file / "
                                "samples_ms / samples_s");
            if (l.contains("samples_file")) {
                std::filesystem::path sf(need_str(l, p, "samples_file"));
                if (!base_dir.empty() && sf.is_relative())
                    sf = std::filesystem::path(base_dir) / sf;
                cfg.latency = LatencyModel::empirical_from_file(sf.string());
            } else if (l.contains("samples_ms")) {
                auto ms = num_array(l.at("samples_ms"), p + "samples_ms");
                for (double& v : ms) v *= 1e-3;
                cfg.latency = LatencyModel::empirical(std::move(ms));
            } else {
                cfg.latency = LatencyModel::empirical(num_array(l.at("samples_s"), p + "samples_s"));
            }
            // echo inline in seconds: reproducible without the original file
            echo["latency"]["samples_s"] = cfg.latency.samples();
        } else {
            fail(p + "model", "expected constant|lognormal|empirical");
        }
        const std::string pol = str_or(l, p, "policy", "max-shared");
        if (pol == "max-shared") cfg.latency_policy = LatencyPolicy::max_shared;
        else if (pol == "iid") cfg.latency_policy = LatencyPolicy::iid;
        else fail(p + "policy", "expected max-shared|iid");
        echo["latency"]["policy"] = pol;
    }

    // ---- protocol ----
    {
        json pr = root.contains("protocol") ? root.at("protocol") : json::object();
        const std::string p = "protocol.";
        check_keys(pr, p, {"gap_guard_s", "prune_horizon_timeouts", "gap_batching"});
        if (pr.contains("gap_guard_s")) cfg.gap_guard_s = need_num(pr, p, "gap_guard_s");
        cfg.prune_horizon_timeouts = num_or(pr, p, "prune_horizon_timeouts", 10.0);
        cfg.gap_batching = bool_or(pr, p, "gap_batching", false);

        if (cfg.gap_guard_s) echo["protocol"]["gap_guard_s"] = *cfg.gap_guard_s;
        echo["protocol"]["prune_horizon_timeouts"] = cfg.prune_horizon_timeouts;
        echo["protocol"]["gap_batching"] = cfg.gap_batching;
    }

    // ---- topology ----
    {
        const json& t = root.at("topology");
        const std::string p = "topology.";
        check_keys(t, p, {"signal_speed_km_per_s", "nodes", "links", "pair"});
        cfg.signal_speed_km_per_s = num_or(t, p, "signal_speed_km_per_s", 2.0e5);

        if (!t.contains("nodes") || !t.at("nodes").is_array())
            fail(p + "nodes", "expected an array of node objects");
        std::vector<NodeSpec> nodes;
        json nodes_echo = json::array();
        for (const auto& nj : t.at("nodes")) {
            const std::string np = p + "nodes[].";
            check_keys(nj, np, {"id", "kind", "insertion_loss_db"});
            NodeSpec n;
            n.id = need_str(nj, np, "id");
            n.kind = parse_kind(need_str(nj, np, "kind"), np + "kind");
            n.insertion_loss_db =
                num_or(nj, np, "insertion_loss_db", default_insertion_loss(n.kind));
            nodes_echo.push_back({{"id", n.id},
                                  {"kind", kind_name(n.kind)},
                                  {"insertion_loss_db", n.insertion_loss_db}});
            nodes.push_back(std::move(n));
        }

        std::vector<FiberLink> links;
        json links_echo = json::array();
        if (t.contains("links")) {
            if (!t.at("links").is_array()) fail(p + "links", "expected an array of link objects");
            for (const auto& lj : t.at("links")) {
                const std::string lp = p + "links[].";
                check_keys(lj, lp, {"a", "b", "length_km", "attenuation_db_per_km"});
                FiberLink l;
                l.a = need_str(lj, lp, "a");
                l.b = need_str(lj, lp, "b");
                l.length_km = need_num(lj, lp, "length_km");
                l.attenuation_db_per_km = num_or(lj, lp, "attenuation_db_per_km", 0.2);
                links_echo.push_back({{"a", l.a},
                                      {"b", l.b},
                                      {"length_km", l.length_km},
                                      {"attenuation_db_per_km", l.attenuation_db_per_km}});
                links.push_back(std::move(l));
            }
        }
        cfg.topology = std::make_shared<Topology>(std::move(nodes), std::move(links));

        if (!t.contains("pair") || !t.at("pair").is_array() || t.at("pair").size() != 2 ||
            !t.at("pair")[0].is_string() || !t.at("pair")[1].is_string())
            fail(p + "pair", "expected [\"node_a\", \"node_b\"]");
        cfg.node_a = t.at("pair")[0].get<std::string>();
        cfg.node_b = t.at("pair")[1].get<std::string>();

        echo["topology"]["signal_speed_km_per_s"] = cfg.signal_speed_km_per_s;
        echo["topology"]["nodes"] = std::move(nodes_echo);
        echo["topology"]["links"] = std::move(links_echo);
        echo["topology"]["pair"] = {cfg.node_a, cfg.node_b};
    }

    // ---- sweep ----
    {
        json s = root.contains("sweep") ? root.at("sweep") : json::object();
        const std::string p = "sweep.";
        check_keys(s, p, {"latencies_s", "pairs", "fidelity_thresholds", "time_grid_s",
                          "technologies"});
        SweepSpec& sw = out.sweep;
        sw.latencies_s = s.contains("latencies_s")
                             ? num_array(s.at("latencies_s"), p + "latencies_s")
                             : std::vector<double>{0.001, 0.005, 0.01, 0.02, 0.03};
        if (s.contains("pairs")) {
            if (!s.at("pairs").is_array()) fail(p + "pairs", "expected an array of [a,b] pairs");
            for (const auto& pj : s.at("pairs")) {
                if (!pj.is_array() || pj.size() != 2 || !pj[0].is_string() || !pj[1].is_string())
                    fail(p + "pairs", "expected an array of [\"a\", \"b\"] pairs");
                sw.pairs.emplace_back(pj[0].get<std::string>(), pj[1].get<std::string>());
            }
        } else {
            sw.pairs.emplace_back(cfg.node_a, cfg.node_b);
        }
        sw.fidelity_thresholds =
            s.contains("fidelity_thresholds")
                ? num_array(s.at("fidelity_thresholds"), p + "fidelity_thresholds")
                : std::vector<double>{0.75, 0.81, 0.85, 0.9, 0.95};
        sw.time_grid_s = s.contains("time_grid_s")
                             ? num_array(s.at("time_grid_s"), p + "time_grid_s")
                             : std::vector<double>{0.0,  0.001, 0.002, 0.005, 0.01, 0.02,
                                                   0.05, 0.1,   0.2,   0.5,   1.0,  2.0};
        if (s.contains("technologies")) {
            if (!s.at("technologies").is_array())
                fail(p + "technologies", "expected an array of technology ids");
            for (const auto& tj : s.at("technologies")) {
                if (!tj.is_string()) fail(p + "technologies", "expected strings");
                sw.technologies.push_back(technology(tj.get<std::string>()).id);
            }
        } else {
            for (const auto& tech : technology_catalog()) sw.technologies.push_back(tech.id);
        }
        for (const auto& [a, b] : sw.pairs) {
            if (!cfg.topology->has_node(a) || !cfg.topology->has_node(b))
                fail(p + "pairs", "unknown node in pair " + a + "-" + b);
        }

        echo["sweep"]["latencies_s"] = sw.latencies_s;
        json pe = json::array();
        for (const auto& [a, b] : sw.pairs) pe.push_back({a, b});
        echo["sweep"]["pairs"] = std::move(pe);
        echo["sweep"]["fidelity_thresholds"] = sw.fidelity_thresholds;
        echo["sweep"]["time_grid_s"] = sw.time_grid_s;
        echo["sweep"]["technologies"] = sw.technologies;
    }

    cfg.validate();
    out.echo = std::move(echo);
    return out;
}

LoadedConfig load_config_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return load_config(j, base_dir);
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> p = {
        {"desk-scale", R"json(
{
  "_note": "Bench-scale network: midpoint source, two memory nodes, 10 dB per arm.",
  "run": {"pair_count": 20000, "source_rate_hz": 10000, "seed": 1},
  "memory": {"technology": "ion-trap-ca40"},
  "decoherence": {"convention": "t2-calibrated", "fidelity_threshold": 0.81},
  "latency": {
    "_note": "sigma is an artifact default (typical metro jitter), not a measured value",
    "model": "lognormal", "median_s": 0.010, "sigma": 0.35, "policy": "max-shared"
  },
  "topology": {
    "signal_speed_km_per_s": 200000,
    "nodes": [
      {"id": "S",  "kind": "source"},
      {"id": "M1", "kind": "entangling"},
      {"id": "M2", "kind": "entangling"}
    ],
    "links": [
      {"a": "S", "b": "M1", "length_km": 10},
      {"a": "S", "b": "M2", "length_km": 10}
    ],
    "pair": ["M1", "M2"]
  },
  "sweep": {
    "latencies_s": [0.001, 0.005, 0.01, 0.02, 0.03],
    "pairs": [["M1", "M2"]],
    "fidelity_thresholds": [0.75, 0.81, 0.85, 0.9, 0.95, 0.99],
    "time_grid_s": [0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5],
    "technologies": ["ion-trap-yb171", "rare-earth-er167", "ion-trap-ca40",
                     "nv-centre", "sc-cavity-long", "sc-cavity-short"]
  }
}
)json"},
        {"metro-full", R"json(
{
  "_note": "Metro-scale network: midpoint source, three switching stages, four memory nodes.",
  "run": {"duration_s": 1.0, "source_rate_hz": 1300000, "seed": 7},
  "memory": {"technology": "ion-trap-ca40"},
  "decoherence": {"convention": "t2-calibrated", "fidelity_threshold": 0.81},
  "latency": {
    "_note": "sigma is an artifact default (typical metro jitter), not a measured value",
    "model": "lognormal", "median_s": 0.010, "sigma": 0.35, "policy": "max-shared"
  },
  "topology": {
    "signal_speed_km_per_s": 200000,
    "nodes": [
      {"id": "S",  "kind": "source"},
      {"id": "R1", "kind": "intermediate"},
      {"id": "R2", "kind": "intermediate"},
      {"id": "R3", "kind": "intermediate"},
      {"id": "B",  "kind": "entangling"},
      {"id": "C",  "kind": "entangling"},
      {"id": "D",  "kind": "entangling"},
      {"id": "E",  "kind": "entangling"}
    ],
    "links": [
      {"a": "S",  "b": "R1", "length_km": 25},
      {"a": "R1", "b": "B",  "length_km": 10},
      {"a": "R1", "b": "C",  "length_km": 25},
      {"a": "S",  "b": "R2", "length_km": 20},
      {"a": "R2", "b": "D",  "length_km": 15},
      {"a": "R2", "b": "R3", "length_km": 10},
      {"a": "R3", "b": "E",  "length_km": 22}
    ],
    "pair": ["C", "E"]
  },
  "sweep": {
    "latencies_s": [0.001, 0.005, 0.01, 0.02, 0.03],
    "pairs": [["C", "E"], ["B", "D"]],
    "fidelity_thresholds": [0.75, 0.81, 0.85, 0.9, 0.95],
    "time_grid_s": [0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5],
    "technologies": ["ion-trap-yb171", "rare-earth-er167", "ion-trap-ca40",
                     "nv-centre", "sc-cavity-long", "sc-cavity-short"]
  }
}
)json"},
    };
    return p;
}

} // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : presets()) n.push_back(k);
        return n;
    }();
    return names;
}

const std::string& preset_text(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) {
        std::ostringstream os;
        os << "unknown preset '" << name << "'; available:";
        for (const auto& n : preset_names()) os << ' ' << n;
        throw config_error(os.str());
    }
    return it->second;
}

} // namespace entsim
