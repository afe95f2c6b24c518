#include <doctest.h>

#include <entsim/errors.hpp>
#include <entsim/experiments.hpp>
#include <entsim/serialize.hpp>

#include <cmath>
#include <memory>
#include <sstream>

using namespace entsim;

namespace {

std::shared_ptr<Topology> desk_topo() {
  std::vector<NodeSpec> nodes = {{"S", NodeKind::source, 0.0},
                                 {"A", NodeKind::entangling, 5.0},
                                 {"B", NodeKind::entangling, 5.0}};
  std::vector<FiberLink> links = {{"S", "A", 25.0, 0.2}, {"S", "B", 25.0, 0.2}};
  return std::make_shared<Topology>(std::move(nodes), std::move(links));
}

RunConfig sweep_base() {
  RunConfig cfg;
  cfg.topology = desk_topo();
  cfg.node_a = "A";
  cfg.node_b = "B";
  cfg.technology = technology("ion-trap-ca40");
  cfg.source_rate_hz = 1e5;
  cfg.pair_count = 5000;
  cfg.latency = LatencyModel::lognormal(std::log(0.010), 0.35);
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("fidelity curve: grid validation and analytic values") {
  const std::vector<MemoryTechnology> techs = {technology("ion-trap-ca40"),
                                               technology("nv-centre")};
  SUBCASE("values match the closed form point by point") {
    const std::vector<double> grid = {0.0, 0.1, 0.25};
    const auto rows = fidelity_curve(techs, grid, DephasingConvention::t2_calibrated);
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
      const double expect = closed_form_fidelity(ExposureIntervals::equal(r.t_s),
                                                 technology(r.technology),
                                                 DephasingConvention::t2_calibrated);
      CHECK(r.fidelity == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(rows[0].fidelity == doctest::Approx(1.0));
  }
  SUBCASE("same T2, smaller T1 decays faster") {
    // both have T2 = 0.5 s; T1 differs (1.14 s vs 200 s)
    const auto rows = fidelity_curve(techs, {0.3}, DephasingConvention::t2_calibrated);
    REQUIRE(rows.size() == 2);
    double f_ca = 0, f_nv = 0;
    for (const auto& r : rows) (r.technology == "ion-trap-ca40" ? f_ca : f_nv) = r.fidelity;
    CHECK(f_ca < f_nv);
  }
  SUBCASE("grid must be strictly increasing and non-negative") {
    CHECK_THROWS_AS(fidelity_curve(techs, {0.1, 0.1}, DephasingConvention::t2_calibrated),
                    config_error);
    CHECK_THROWS_AS(fidelity_curve(techs, {-0.1, 0.1}, DephasingConvention::t2_calibrated),
                    config_error);
    CHECK_THROWS_AS(fidelity_curve(techs, {}, DephasingConvention::t2_calibrated),
                    config_error);
    CHECK_THROWS_AS(fidelity_curve({}, {0.1}, DephasingConvention::t2_calibrated),
                    config_error);
  }
}

TEST_CASE("buffer sweep: occupancy grows monotonically with latency") {
  const auto rows = buffer_sweep(sweep_base(), {{"A", "B"}},
                                 {0.001, 0.005, 0.010, 0.020});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].occupancy_mean_a > rows[i - 1].occupancy_mean_a);
    CHECK(rows[i].occupancy_mean_b > rows[i - 1].occupancy_mean_b);
    CHECK(rows[i].occupancy_max_a >= rows[i - 1].occupancy_max_a);
  }
  // residency is one latency: mean occupancy ~ arrival rate * latency
  // arrival rate per node = 1e5 * 10^(-1) = 1e4 /s
  CHECK(rows[2].occupancy_mean_a == doctest::Approx(1e4 * 0.010).epsilon(0.10));
}

TEST_CASE("rate sweep: tighter thresholds never verify more pairs") {
  RunConfig base = sweep_base();
  base.pair_count = 3000;
  // latencies comparable to the Ca-40 windows so the knob actually bites
  base.latency = LatencyModel::lognormal(std::log(0.10), 0.6);
  const auto rows = rate_vs_timeout(base, {0.75, 0.81, 0.90, 0.99});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].fidelity_threshold == doctest::Approx(i == 0   ? 0.75
                                                        : i == 1 ? 0.81
                                                        : i == 2 ? 0.90
                                                                 : 0.99));
    if (i > 0) {
      CHECK(rows[i].timeout_s < rows[i - 1].timeout_s);
      CHECK(rows[i].verified <= rows[i - 1].verified);
      REQUIRE(rows[i].max_tolerable_latency_s.has_value());
      CHECK(*rows[i].max_tolerable_latency_s < *rows[i - 1].max_tolerable_latency_s);
    }
  }
  // the sweep must actually separate the rows somewhere
  CHECK(rows.front().verified > rows.back().verified);
}

TEST_CASE("rate sweep validates thresholds") {
  CHECK_THROWS_AS(rate_vs_timeout(sweep_base(), {}), config_error);
  CHECK_THROWS_AS(rate_vs_timeout(sweep_base(), {0.5}), config_error);
  CHECK_THROWS_AS(rate_vs_timeout(sweep_base(), {1.2}), config_error);
}

TEST_CASE("csv writers emit stable headers and exact row counts") {
  SUBCASE("fidelity curve") {
    std::ostringstream os;
    write_fidelity_curve_csv(os, {{"x", 0.5, 0.75}});
    CHECK(os.str() == "technology,t_s,fidelity\nx,0.5,0.75\n");
  }
  SUBCASE("buffer sweep") {
    std::ostringstream os;
    write_buffer_sweep_csv(os, {{0.01, "A", "B", 1.5, 2.5, 3, 4, 42}});
    CHECK(os.str() ==
          "latency_s,node_a,node_b,occupancy_mean_a,occupancy_mean_b,"
          "occupancy_max_a,occupancy_max_b,verified\n0.01,A,B,1.5,2.5,3,4,42\n");
  }
  SUBCASE("rate sweep, including the unbounded-latency row") {
    std::ostringstream os;
    write_rate_sweep_csv(os, {{0.81, 0.239, 0.1, 10, 5.0},
                              {0.75, 0.3, std::nullopt, 12, 6.0}});
    const std::string out = os.str();
    CHECK(out.find("fidelity_threshold,timeout_s,max_tolerable_latency_s,verified,"
                   "verified_rate_hz\n") == 0);
    CHECK(out.find("0.81,0.239,0.1,10,5\n") != std::string::npos);
    CHECK(out.find("0.75,0.3,unbounded,12,6\n") != std::string::npos);
  }
}

TEST_CASE("shortest round-trip float formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.0025118864315095794) == "0.0025118864315095794");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
