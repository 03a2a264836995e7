// qhm_main.cpp — command-line front end: spectrum / steady / sweep / check.
//
// Exit codes: 0 success, 1 config or I/O error, 2 numerical failure of all
// grid points, 3 invariant violation reported by `check`.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "qhm/pipeline.hpp"

namespace {

qhm::RunConfig load(const std::string& path,
                    const std::vector<std::string>& sets) {
  return qhm::load_config(path, sets);
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw qhm::IoError("cannot open output file: " + path);
  return file;
}

void print_spectrum(std::ostream& os, const qhm::LineSpectrum& s) {
  os << "# polaron-qhm v1\nfrequency,weight\n";
  for (const auto& ln : s.lines)
    os << qhm::format_value(ln.frequency) << ","
       << qhm::format_value(ln.weight) << "\n";
}

int cmd_spectrum(const qhm::RunConfig& cfg, const std::string& which,
                 const std::string& out_path) {
  const double eta = cfg.numerics.eta(cfg.omega0);
  const double tol = 1e-9 * cfg.omega0;
  qhm::LineSpectrum s;
  if (which == "g1")
    s = qhm::spectrum_G1(cfg.cold, cfg.Omega, eta, cfg.numerics.bessel_tol,
                         tol);
  else if (which == "g2")
    s = qhm::spectrum_G2(cfg.cold, cfg.hot, eta, cfg.numerics.bessel_tol, tol)
            .spectrum;
  else if (which == "weak-cold")
    s = qhm::weak_spectrum(cfg.cold, eta);
  else if (which == "weak-hot")
    s = qhm::weak_spectrum(cfg.hot, eta);
  else
    throw qhm::ConfigError("--which: expected g1|g2|weak-cold|weak-hot");
  std::ofstream file;
  print_spectrum(open_out(file, out_path), s);
  return 0;
}

int cmd_steady(const qhm::RunConfig& cfg, const std::string& out_path) {
  const qhm::PointOutputs p = qhm::compute_point(cfg);
  std::ofstream file;
  std::ostream& os = open_out(file, out_path);
  os << "# polaron-qhm v1\nquantity,value\n";
  auto put = [&](const std::string& k, double v) {
    os << k << "," << qhm::format_value(v) << "\n";
  };
  put("A", p.machine.franck_condon);
  put("Omega_r", p.machine.omega_r);
  put("delta", p.machine.delta);
  if (p.steady) {
    put("rho_ee", p.steady->rho(0, 0).real());
    put("rho_gg", p.steady->rho(1, 1).real());
    put("rho_eg_re", p.steady->rho(0, 1).real());
    put("rho_eg_im", p.steady->rho(0, 1).imag());
    put("residual", p.steady->residual);
    put("min_eigenvalue", p.steady->min_eigenvalue);
  }
  put("J1", p.report.J1);
  put("J2", p.report.J2);
  put("P", p.report.P);
  put("J_C", p.report.J_C);
  put("beta_omega0", p.report.beta_eff);
  put("lambda_omega0", p.report.lambda);
  os << "regime," << qhm::regime_name(p.report.regime) << "\n";
  for (const auto& rc : p.L.components)
    os << "rate[channel=" << rc.channel << " nu="
       << qhm::format_value(rc.rate_frequency)
       << "]," << qhm::format_value(rc.rate) << "\n";
  std::string flags;
  for (const auto& f : p.flags) flags += (flags.empty() ? "" : ";") + f;
  os << "flags," << (flags.empty() ? "-" : flags) << "\n";
  return 0;
}

int cmd_sweep(const qhm::RunConfig& cfg, int threads) {
  if (cfg.output.csv_path.empty())
    throw qhm::ConfigError("output.csv_path: required for sweep");
  std::ofstream csv(cfg.output.csv_path, std::ios::binary);
  if (!csv)
    throw qhm::IoError("cannot open output file: " + cfg.output.csv_path);
  std::ofstream svg;
  std::ostream* svg_os = nullptr;
  if (!cfg.output.svg_path.empty()) {
    svg.open(cfg.output.svg_path, std::ios::binary);
    if (!svg)
      throw qhm::IoError("cannot open output file: " + cfg.output.svg_path);
    svg_os = &svg;
  }
  return qhm::run_sweep(cfg, csv, svg_os, threads);
}

int cmd_check(const qhm::RunConfig& cfg, const std::string& g1_csv) {
  std::optional<qhm::LineSpectrum> injected;
  if (!g1_csv.empty())
    injected = qhm::read_spectrum_csv(g1_csv, cfg.numerics.eta(cfg.omega0));
  const auto checks =
      qhm::run_check(cfg, injected ? &*injected : nullptr);
  const bool ok = qhm::write_check_report(std::cout, checks);
  return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"polaron-qhm: strongly coupled driven two-level heat machine"};
  app.require_subcommand(1);

  std::string config_path, out_path, which = "g1", g1_csv;
  std::vector<std::string> sets;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file path")->required();
    sub->add_option("--set", sets, "override: key=value (repeatable)");
  };

  auto* sp = app.add_subcommand("spectrum", "emit a line spectrum as CSV");
  add_common(sp);
  sp->add_option("--which", which, "g1|g2|weak-cold|weak-hot");
  sp->add_option("--out", out_path, "output path (default stdout)");

  auto* st = app.add_subcommand("steady", "solve one working point");
  add_common(st);
  st->add_option("--out", out_path, "output path (default stdout)");

  auto* sw = app.add_subcommand("sweep", "run the configured parameter sweep");
  add_common(sw);
  sw->add_option("--threads", threads, "worker threads (output is identical)");

  auto* ck = app.add_subcommand("check", "run the invariant check harness");
  add_common(ck);
  ck->add_option("--g1-csv", g1_csv,
                 "use this spectrum CSV for the KMS check (fault injection)");

  CLI11_PARSE(app, argc, argv);

  try {
    const qhm::RunConfig cfg = load(config_path, sets);
    if (sp->parsed()) return cmd_spectrum(cfg, which, out_path);
    if (st->parsed()) return cmd_steady(cfg, out_path);
    if (sw->parsed()) return cmd_sweep(cfg, threads);
    return cmd_check(cfg, g1_csv);
  } catch (const qhm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const qhm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const qhm::NonConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
