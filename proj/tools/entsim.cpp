#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "entsim/config.hpp"
#include "entsim/decoherence.hpp"
#include "entsim/engine.hpp"
#include "entsim/errors.hpp"
#include "entsim/experiments.hpp"
#include "entsim/serialize.hpp"

namespace fs = std::filesystem;
using entsim::ordered_json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool trace = false;
};

std::string utc_stamp(const char* fmt) {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, fmt, &tm);
    return buf;
}

fs::path resolve_out_dir(const CommonOpts& o) {
    std::string dir = o.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("ENTSIM_OUT")) dir = env;
    }
    if (dir.empty()) dir = ".";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw entsim::io_error("cannot create output directory '" + dir + "'");
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw entsim::io_error("cannot open '" + p.string() + "' for writing");
    os << content;
    os.flush();
    if (!os) throw entsim::io_error("failed writing '" + p.string() + "'");
    std::cout << "wrote " << p.string() << "\n";
}

entsim::LoadedConfig load_from(const CommonOpts& o) {
    if (!o.config_path.empty() && !o.preset.empty())
        throw entsim::config_error("give --config or --preset, not both");
    entsim::LoadedConfig lc;
    if (!o.config_path.empty()) {
        lc = entsim::load_config_file(o.config_path);
    } else if (!o.preset.empty()) {
        lc = entsim::load_config_text(entsim::preset_text(o.preset));
    } else {
        std::ostringstream os;
        os << "a config is required: pass --config FILE or --preset NAME (presets:";
        for (const auto& n : entsim::preset_names()) os << ' ' << n;
        os << ")";
        throw entsim::config_error(os.str());
    }
    if (o.seed) {
        lc.run.seed = *o.seed;
        lc.echo["run"]["seed"] = *o.seed;
    }
    return lc;
}

ordered_json with_header(const char* experiment, const entsim::LoadedConfig& lc) {
    ordered_json j;
    j["experiment"] = experiment;
    j["generated_at"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
    j["seed"] = lc.run.seed;
    return j;
}

int cmd_run(const CommonOpts& o) {
    const entsim::LoadedConfig lc = load_from(o);
    const fs::path out = resolve_out_dir(o);
    const std::string stamp = utc_stamp("%Y%m%dT%H%M%SZ");
    const std::string base = "run-" + stamp + "-seed" + std::to_string(lc.run.seed);

    entsim::CsvTraceSink sink;
    const entsim::RunReport rep =
        entsim::run_simulation(lc.run, o.trace ? &sink : nullptr);

    ordered_json j = with_header("run", lc);
    const ordered_json report_json = entsim::report_to_json(rep);
    for (const auto& [k, v] : report_json.items()) j[k] = v;
    j["config"] = lc.echo;
    write_file(out / (base + ".json"), j.dump(2) + "\n");

    if (o.trace) {
        std::ostringstream ev, ms;
        sink.write_events(ev);
        sink.write_messages(ms);
        write_file(out / (base + "-events.csv"), ev.str());
        write_file(out / (base + "-messages.csv"), ms.str());
    }

    std::printf("emitted %llu  verified %llu  lost %llu  timed_out %llu  overflow %llu\n",
                static_cast<unsigned long long>(rep.pairs.emitted),
                static_cast<unsigned long long>(rep.pairs.verified),
                static_cast<unsigned long long>(rep.pairs.lost),
                static_cast<unsigned long long>(rep.pairs.timed_out),
                static_cast<unsigned long long>(rep.pairs.overflow));
    std::printf("verified rate %.6g /s", rep.verified_rate_hz);
    if (rep.fidelity.count)
        std::printf("  mean fidelity %.6f  min %.6f", rep.fidelity.mean(), rep.fidelity.min);
    std::printf("\n");
    for (const auto& n : rep.nodes)
        std::printf("node %s: occupancy mean %.4f max %u\n", n.id.c_str(), n.occupancy_mean,
                    n.occupancy_max);
    return 0;
}

int cmd_fidelity_curve(const CommonOpts& o) {
    const entsim::LoadedConfig lc = load_from(o);
    const fs::path out = resolve_out_dir(o);
    const std::string stamp = utc_stamp("%Y%m%dT%H%M%SZ");
    const std::string base = "fidelity-curve-" + stamp + "-seed" + std::to_string(lc.run.seed);

    std::vector<entsim::MemoryTechnology> techs;
    for (const auto& id : lc.sweep.technologies) techs.push_back(entsim::technology(id));
    const auto rows = entsim::fidelity_curve(techs, lc.sweep.time_grid_s, lc.run.convention);

    std::ostringstream csv;
    entsim::write_fidelity_curve_csv(csv, rows);
    write_file(out / (base + ".csv"), csv.str());

    ordered_json j = with_header("fidelity-curve", lc);
    j["reference_threshold"] = 0.81;  // QKD usability line
    j["rows"] = rows.size();
    j["csv"] = base + ".csv";
    j["config"] = lc.echo;
    write_file(out / (base + ".json"), j.dump(2) + "\n");
    return 0;
}

int cmd_buffer_sweep(const CommonOpts& o) {
    const entsim::LoadedConfig lc = load_from(o);
    const fs::path out = resolve_out_dir(o);
    const std::string stamp = utc_stamp("%Y%m%dT%H%M%SZ");
    const std::string base = "buffer-sweep-" + stamp + "-seed" + std::to_string(lc.run.seed);

    const auto rows = entsim::buffer_sweep(lc.run, lc.sweep.pairs, lc.sweep.latencies_s);
    std::ostringstream csv;
    entsim::write_buffer_sweep_csv(csv, rows);
    write_file(out / (base + ".csv"), csv.str());

    ordered_json j = with_header("buffer-sweep", lc);
    j["rows"] = rows.size();
    j["csv"] = base + ".csv";
    j["config"] = lc.echo;
    write_file(out / (base + ".json"), j.dump(2) + "\n");
    return 0;
}

int cmd_rate_sweep(const CommonOpts& o) {
    const entsim::LoadedConfig lc = load_from(o);
    const fs::path out = resolve_out_dir(o);
    const std::string stamp = utc_stamp("%Y%m%dT%H%M%SZ");
    const std::string base = "rate-sweep-" + stamp + "-seed" + std::to_string(lc.run.seed);

    const auto rows = entsim::rate_vs_timeout(lc.run, lc.sweep.fidelity_thresholds);
    std::ostringstream csv;
    entsim::write_rate_sweep_csv(csv, rows);
    write_file(out / (base + ".csv"), csv.str());

    ordered_json j = with_header("rate-sweep", lc);
    j["rows"] = rows.size();
    j["csv"] = base + ".csv";
    j["config"] = lc.echo;
    write_file(out / (base + ".json"), j.dump(2) + "\n");
    return 0;
}

int cmd_list_technologies() {
    std::printf("%-18s %12s %12s %16s  %s\n", "id", "T1 [s]", "T2 [s]", "window@0.81 [s]",
                "description");
    for (const auto& t : entsim::technology_catalog()) {
        const double window = entsim::timeout_from_threshold(0.81, t);
        std::printf("%-18s %12g %12g %16.6g  %s\n", t.id.c_str(), t.t1_s, t.t2_s, window,
                    t.display_name.c_str());
    }
    return 0;
}

int cmd_validate(const CommonOpts& o) {
    const entsim::LoadedConfig lc = load_from(o);
    std::cout << lc.echo.dump(2) << "\n";
    std::cout << "OK\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator of entangled-pair distribution with a "
                 "classical verification protocol"};
    app.require_subcommand(1);

    CommonOpts opt;
    auto add_common = [&](CLI::App* sub, bool with_trace) {
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--preset", opt.preset, "built-in config (desk-scale, metro-full)");
        sub->add_option("--out", opt.out_dir, "output directory (default: $ENTSIM_OUT or .)");
        sub->add_option("--seed", opt.seed, "override the config's RNG seed");
        if (with_trace)
            sub->add_flag("--trace", opt.trace, "write per-event and per-message CSV traces");
    };

    CLI::App* c_run = app.add_subcommand("run", "simulate one run and write a JSON report");
    add_common(c_run, true);
    CLI::App* c_fc = app.add_subcommand("fidelity-curve",
                                        "storage-time fidelity curves per technology (CSV)");
    add_common(c_fc, false);
    CLI::App* c_bs = app.add_subcommand("buffer-sweep",
                                        "buffer occupancy vs control latency (CSV)");
    add_common(c_bs, false);
    CLI::App* c_rs = app.add_subcommand("rate-sweep",
                                        "verified-pair rate vs fidelity threshold (CSV)");
    add_common(c_rs, false);
    CLI::App* c_lt = app.add_subcommand("list-technologies", "print the memory catalog");
    CLI::App* c_vc = app.add_subcommand("validate-config",
                                        "check a config and print its normalized form");
    add_common(c_vc, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config error
    }

    try {
        if (app.got_subcommand(c_run)) return cmd_run(opt);
        if (app.got_subcommand(c_fc)) return cmd_fidelity_curve(opt);
        if (app.got_subcommand(c_bs)) return cmd_buffer_sweep(opt);
        if (app.got_subcommand(c_rs)) return cmd_rate_sweep(opt);
        if (app.got_subcommand(c_lt)) return cmd_list_technologies();
        if (app.got_subcommand(c_vc)) return cmd_validate(opt);
    } catch (const entsim::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const entsim::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const entsim::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
