// test_pipeline.cpp — config parsing, sweep machinery, determinism,
// the check harness, and CSV/SVG emission.
#include <catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "qhm/pipeline.hpp"

using namespace qhm;

namespace {

const char* kMinimalConfig = R"(
# minimal working point
machine.omega0 = 1.0
machine.omega_l = 0.4
machine.Omega = 0.002
cold.xi = 0.3
cold.beta = 2.0
cold.mode_frequencies = 0.37
cold.mode_couplings = 0.3
hot.xi = 0.05
hot.beta = 1.0
hot.mode_frequencies = 1.37
hot.mode_couplings = 0.5
)";

RunConfig parse(const std::string& text,
                const std::vector<std::string>& overrides = {}) {
  std::istringstream is(text);
  ConfigMap kv = parse_config_text(is);
  for (const auto& o : overrides) apply_override(kv, o);
  return config_from_map(std::move(kv));
}

std::string with_sweep(const std::string& extra) {
  return std::string(kMinimalConfig) +
         "sweep.parameter = xi_both\nsweep.from = 0.05\nsweep.to = 0.8\n"
         "sweep.points = 5\nsweep.scale = log\n" +
         extra;
}

} // namespace

TEST_CASE("load_config: minimal config fills defaults") {
  const RunConfig cfg = parse(kMinimalConfig);
  CHECK(cfg.omega0 == 1.0);
  CHECK(cfg.cold.modes.size() == 1);
  CHECK(cfg.hot.beta == 1.0);
  CHECK(cfg.numerics.eta(cfg.omega0) == 1e-2); // default 1e-2 * omega0
  CHECK(cfg.numerics.bessel_tol == 1e-12);
  CHECK(cfg.numerics.rank_tol == 1e-10);
  CHECK(cfg.numerics.weight_floor == 1e-14);
  CHECK_FALSE(cfg.sweep.present);
}

TEST_CASE("load_config: validation errors") {
  CHECK_THROWS_AS(parse(std::string(kMinimalConfig) + "bogus.key = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse(with_sweep("") , {"sweep.points=1"}), ConfigError);
  CHECK_THROWS_AS(parse(with_sweep(""), {"sweep.from=0"}), ConfigError);
  CHECK_THROWS_AS(parse(with_sweep(""), {"sweep.scale=cubic"}), ConfigError);
  CHECK_THROWS_AS(parse(with_sweep(""), {"sweep.parameter=g"}), ConfigError);
  // malformed lines and values
  CHECK_THROWS_AS(parse("machine.omega0\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimalConfig) + "cold.xi = 0.4\n"),
                  ConfigError); // duplicate
  CHECK_THROWS_AS(parse(kMinimalConfig, {"machine.omega0=abc"}), ConfigError);
  CHECK_THROWS_AS(
      parse(kMinimalConfig, {"cold.mode_couplings=0.3 0.4"}), // length clash
      ConfigError);
  CHECK_THROWS_AS(parse(kMinimalConfig, {"machine.omega0=-2"}), ConfigError);
}

TEST_CASE("load_config: inf sentinel and overrides") {
  const RunConfig cfg = parse(kMinimalConfig, {"cold.beta=inf",
                                               "machine.Omega=0.5"});
  CHECK(std::isinf(cfg.cold.beta));
  CHECK(cfg.Omega == 0.5);
  CHECK_THROWS_AS(parse(kMinimalConfig, {"no_equals_sign"}), ConfigError);
}

TEST_CASE("sweep_grid endpoints and scales") {
  SweepSpec s;
  s.present = true;
  s.from = 1.0;
  s.to = 3.0;
  s.points = 5;
  const auto lin = sweep_grid(s);
  CHECK(lin.front() == 1.0);
  CHECK(lin.back() == 3.0);
  CHECK_THAT(lin[2], Catch::Matchers::WithinRel(2.0, 1e-15));
  s.scale = "log";
  s.from = 0.01;
  s.to = 100.0;
  const auto lg = sweep_grid(s);
  CHECK_THAT(lg[2], Catch::Matchers::WithinRel(1.0, 1e-12));
  CHECK_THAT(lg.back(), Catch::Matchers::WithinRel(100.0, 1e-12));
}

TEST_CASE("apply_sweep_value routes every parameter") {
  RunConfig cfg = parse(kMinimalConfig);
  apply_sweep_value(cfg, "xi_c", 0.9);
  CHECK(cfg.cold.xi == 0.9);
  apply_sweep_value(cfg, "xi_both", 0.7);
  CHECK(cfg.cold.xi == 0.7);
  CHECK(cfg.hot.xi == 0.7);
  apply_sweep_value(cfg, "omega_l", 0.2);
  CHECK(cfg.omega_l == 0.2);
  apply_sweep_value(cfg, "beta_H", 3.0);
  CHECK(cfg.hot.beta == 3.0);
}

TEST_CASE("run_point: decoupled machine flags all-rates-zero") {
  RunConfig cfg = parse(kMinimalConfig, {"cold.xi=0", "hot.xi=0"});
  const SweepRow row = run_point(cfg, 0.0);
  CHECK_FALSE(row.failed);
  CHECK(row.fields.at("flags").find("all-rates-zero") != std::string::npos);
  CHECK(row.fields.at("P") == format_value(0.0));
  CHECK(row.fields.at("J1") == format_value(0.0));
}

TEST_CASE("run_point: equilibrium point produces no power") {
  RunConfig cfg = parse(kMinimalConfig, {"machine.Omega=0", "hot.beta=2.0",
                                         "numerics.broadening_eta=1e-4"});
  const SweepRow row = run_point(cfg, 0.0);
  REQUIRE_FALSE(row.failed);
  const double P = std::strtod(row.fields.at("P").c_str(), nullptr);
  CHECK(std::abs(P) < 1e-12);
  CHECK(row.fields.at("flags").find("degenerate-temperatures") !=
        std::string::npos);
}

TEST_CASE("run_point: numerical failure becomes a flagged row") {
  RunConfig cfg = parse(kMinimalConfig, {"cold.xi=80"});
  const SweepRow row = run_point(cfg, 80.0);
  CHECK(row.failed);
  CHECK(row.fields.at("flags").rfind("failed:", 0) == 0);
  CHECK(row.fields.at("regime") == "-");
}

TEST_CASE("run_sweep: deterministic and parallel-safe output") {
  const RunConfig cfg = parse(with_sweep(""));
  std::ostringstream a, b, c;
  CHECK(run_sweep(cfg, a, nullptr, 1) == 0);
  CHECK(run_sweep(cfg, b, nullptr, 1) == 0);
  CHECK(run_sweep(cfg, c, nullptr, 3) == 0);
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str()); // row order independent of worker count
  // schema header
  std::istringstream is(a.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# polaron-qhm v1");
  std::getline(is, line);
  CHECK(line.rfind("value,A,Omega_r,", 0) == 0);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("run_sweep: all points failing yields exit code 2") {
  const RunConfig cfg = parse(with_sweep(""), {"sweep.from=60",
                                               "sweep.to=90"});
  std::ostringstream os;
  CHECK(run_sweep(cfg, os, nullptr, 1) == 2);
}

TEST_CASE("run_sweep: column selection and svg emission") {
  RunConfig cfg = parse(with_sweep("output.columns = value P regime\n"));
  std::ostringstream csv, svg;
  CHECK(run_sweep(cfg, csv, &svg, 1) == 0);
  std::istringstream is(csv.str());
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line == "value,P,regime");
  CHECK(svg.str().find("<svg") != std::string::npos);
  CHECK(svg.str().find("<polyline") != std::string::npos);

  RunConfig bad = parse(with_sweep(""));
  bad.output.columns = {"bogus"};
  CHECK_THROWS_AS(selected_columns(bad), ConfigError);
}

TEST_CASE("format_value round-trips doubles exactly") {
  for (double x : {1.0 / 3.0, M_PI, 1e-300, -2.5e17, 0.1}) {
    const double back = std::strtod(format_value(x).c_str(), nullptr);
    CHECK(back == x);
  }
  CHECK(format_value(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("run_check: healthy engine config passes every invariant") {
  const RunConfig cfg =
      parse(kMinimalConfig, {"numerics.broadening_eta=1e-4"});
  const auto checks = run_check(cfg);
  for (const auto& c : checks) {
    INFO(c.name << " measured " << c.measured << " tol " << c.tolerance);
    CHECK(c.pass);
  }
  std::ostringstream os;
  CHECK(write_check_report(os, checks));
  CHECK(os.str().find("invariant,measured,tolerance,status") == 0);
}

TEST_CASE("run_check: corrupted spectrum trips the KMS invariant") {
  const RunConfig cfg =
      parse(kMinimalConfig, {"numerics.broadening_eta=1e-4"});
  LineSpectrum g1 = spectrum_G1(cfg.cold, cfg.Omega, 1e-4, 1e-12, 1e-9);
  REQUIRE(g1.lines.size() > 2);
  for (auto& ln : g1.lines)
    if (ln.frequency > 0.1) {
      ln.weight *= 1.5;
      break;
    }
  const auto checks = run_check(cfg, &g1);
  bool kms_failed = false;
  for (const auto& c : checks)
    if (c.name == "kms-g1") kms_failed = !c.pass;
  CHECK(kms_failed);
  std::ostringstream os;
  CHECK_FALSE(write_check_report(os, checks));
}

TEST_CASE("read_spectrum_csv round trip") {
  const std::string path = "test_spectrum_roundtrip.csv";
  {
    std::ofstream out(path);
    out << "# polaron-qhm v1\nfrequency,weight\n";
    out << format_value(-0.5) << "," << format_value(0.25) << "\n";
    out << format_value(1.5) << "," << format_value(0.75) << "\n";
  }
  const LineSpectrum s = read_spectrum_csv(path, 1e-2);
  std::remove(path.c_str());
  REQUIRE(s.lines.size() == 2);
  CHECK(s.lines[0].frequency == -0.5);
  CHECK(s.lines[1].weight == 0.75);
  CHECK_THROWS_AS(read_spectrum_csv("does_not_exist.csv", 1e-2), IoError);
}
