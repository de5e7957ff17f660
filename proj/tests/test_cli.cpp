#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rwpcn/config.hpp"

using namespace rwpcn;

TEST_CASE("empty config yields the default simulation setup") {
  const auto sc = parse_config("");
  CHECK(sc.params.num_pairs == 4);
  CHECK(sc.params.num_subcarriers == 64);
  CHECK(sc.params.total_energy == doctest::Approx(1.0));  // 30 dBm
  CHECK(sc.params.peak_power == doctest::Approx(2.0));
  CHECK(sc.params.conversion_efficiency == doctest::Approx(0.8));
  CHECK(sc.params.bandwidth == doctest::Approx(1e7));
  CHECK(sc.params.noise_density ==
        doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  for (double c : sc.params.processing_cost) CHECK(c == doctest::Approx(1e-7));
  CHECK(sc.layout.pathloss_exponent == 3.0);
  CHECK(sc.layout.rician_factor == 3.0);
}

TEST_CASE("dbm fields convert at the boundary") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(watts_to_dbm(1.0) == doctest::Approx(30.0));
  const auto sc = parse_config("P_dbm = 30\n");
  CHECK(sc.params.total_energy == doctest::Approx(1.0));
}

TEST_CASE("invalid values raise config errors naming line and key") {
  CHECK_THROWS_AS(parse_config("eta = 1.5\n"), ConfigError);
  try {
    parse_config("# comment\nnot_a_key = 3\n");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
    CHECK(e.key == "not_a_key");
  }
  CHECK_THROWS_AS(parse_config("K = four\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("orphan line\n"), ConfigError);
}

TEST_CASE("config round trips experiment settings") {
  const std::string cfg =
      "experiment = relay-position-sweep\n"
      "grid = -5, 0, 5\n"
      "realizations = 7\n"
      "seed = 13\n"
      "solvers = tdma-optimal, fdma-suboptimal\n"
      "record_timing = 0\n";
  const auto sc = parse_config(cfg);
  CHECK(sc.spec.kind == ExperimentKind::RelayPosition);
  CHECK(sc.spec.grid == std::vector<double>{-5, 0, 5});
  CHECK(sc.spec.realizations == 7);
  CHECK(sc.spec.base_seed == 13);
  CHECK(sc.spec.solvers[1] == SolverId::FdmaSuboptimal);
  CHECK(!sc.spec.record_timing);
}

TEST_CASE("csv emission: schema, empty grid, determinism") {
  ExperimentResult r;
  std::ostringstream empty;
  emit_result_csv(r, empty);
  CHECK(empty.str() ==
        "grid_value,solver,mean_sum_rate,stderr,mean_alpha0,mean_wpt_energy,"
        "mean_gap,mean_ms\n");

  r.grid = {30.0};
  r.solvers = {SolverId::TdmaOptimal};
  CellStats c;
  c.mean_sum_rate = 12.3456789012345678;
  c.mean_alpha0 = 0.0123;
  r.cells = {{c}};
  std::ostringstream a, b;
  emit_result_csv(r, a);
  emit_result_csv(r, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("tdma-optimal") != std::string::npos);
  CHECK(a.str().find("e+01") != std::string::npos);  // scientific notation
  CHECK(a.str().back() == '\n');
}

TEST_CASE("json emission round trips") {
  ExperimentResult r;
  r.grid = {20.0, 30.0};
  r.solvers = {SolverId::TdmaOptimal, SolverId::FdmaOptimal};
  CellStats c0, c1;
  c0.mean_sum_rate = 3.14159265358979;
  c0.stderr_sum_rate = 0.01;
  c0.mean_gap = 1e-4;
  c1.mean_sum_rate = 2.71828182845905;
  c1.failures = 1;
  r.cells = {{c0, c1}, {c1, c0}};
  r.errors = {"solver x failed"};

  std::stringstream buf;
  emit_result_json(r, buf);
  const auto back = read_result_json(buf);
  CHECK(back == r);
}
