// pipeline.hpp — the full working-point pipeline (spectra -> decomposition
// -> beta/lambda -> Liouvillian -> steady state -> thermodynamics), sweeps
// with deterministic CSV/SVG emission, and the invariant check harness.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qhm/config.hpp"
#include "qhm/floquet.hpp"
#include "qhm/kms.hpp"
#include "qhm/polaron.hpp"
#include "qhm/thermo.hpp"

namespace qhm {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- formatting

// Fixed float formatting (17 significant digits) so identical configs
// produce byte-identical CSV.
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ------------------------------------------------------------------- sweeps

inline std::vector<double> sweep_grid(const SweepSpec& s) {
  if (!s.present) throw ConfigError("sweep: no sweep section in config");
  std::vector<double> g(s.points);
  if (s.scale == "log") {
    const double lf = std::log(s.from), lt = std::log(s.to);
    for (int i = 0; i < s.points; ++i)
      g[i] = std::exp(lf + (lt - lf) * i / (s.points - 1));
  } else {
    for (int i = 0; i < s.points; ++i)
      g[i] = s.from + (s.to - s.from) * i / (s.points - 1);
  }
  return g;
}

inline void apply_sweep_value(RunConfig& cfg, const std::string& parameter,
                              double v) {
  if (parameter == "xi_c") cfg.cold.xi = v;
  else if (parameter == "xi_h") cfg.hot.xi = v;
  else if (parameter == "xi_both") cfg.cold.xi = cfg.hot.xi = v;
  else if (parameter == "omega_l") cfg.omega_l = v;
  else if (parameter == "Omega") cfg.Omega = v;
  else if (parameter == "beta_C") cfg.cold.beta = v;
  else if (parameter == "beta_H") cfg.hot.beta = v;
  else throw ConfigError("sweep.parameter: unknown parameter '" + parameter +
                         "'");
}

// -------------------------------------------------------------- point solve

// Every intermediate artifact of one working point, for reuse by the check
// harness and tests.
struct PointOutputs {
  MachineParams machine;
  LineSpectrum G1;
  SpectrumWithDecomposition G2;
  std::vector<HarmonicComponent> components;
  Liouvillian L;
  std::optional<SteadyState> steady; // absent when all rates vanish
  std::optional<LocalTemperature> lt_omega0;
  Currents currents;
  ThermoReport report;
  std::vector<std::string> flags;
};

inline PointOutputs compute_point(const RunConfig& cfg) {
  PointOutputs out;
  out.machine =
      make_machine(cfg.omega0, cfg.omega_l, cfg.Omega, cfg.cold, cfg.hot);
  const double eta = cfg.numerics.eta(cfg.omega0);
  const double tol = 1e-9 * cfg.omega0;

  out.G1 = spectrum_G1(cfg.cold, cfg.Omega, eta, cfg.numerics.bessel_tol, tol);
  out.G2 = spectrum_G2(cfg.cold, cfg.hot, eta, cfg.numerics.bessel_tol, tol);
  out.components = fourier_decompose(out.machine, dressed_basis(out.machine));
  out.L = build_liouvillian(out.components, out.G1, out.G2.spectrum, tol);

  out.lt_omega0 =
      local_temperature_near(out.G2.decomposition, cfg.omega0, eta,
                             cfg.cold.beta, cfg.hot.beta,
                             cfg.numerics.weight_floor);
  if (!out.lt_omega0) out.flags.push_back("no-line-at-omega0");
  else if (out.lt_omega0->degenerate)
    out.flags.push_back("degenerate-temperatures");

  if (out.L.all_rates_zero) {
    out.flags.push_back("all-rates-zero");
  } else {
    try {
      out.steady = steady_state(out.L, cfg.numerics.rank_tol);
    } catch (const NonUniqueSteadyStateError&) {
      out.flags.push_back("kernel-degenerate");
      throw;
    }
    out.currents = currents_and_power(out.L, out.steady->rho);
  }
  const LocalTemperature* lt =
      out.lt_omega0 ? &*out.lt_omega0 : nullptr;
  out.report =
      make_thermo_report(out.currents, lt, cfg.cold.beta, cfg.hot.beta);
  if (out.machine.weak_driving) out.flags.push_back("weak-driving");
  return out;
}

// ----------------------------------------------------------------- CSV rows

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "value",       "A",          "Omega_r",   "G1_delta", "G2_omega0",
      "beta_omega0", "lambda_omega0", "J1",     "J2",       "P",
      "J_C",         "eta",        "eta_naive", "eta_carnot", "regime",
      "residual",    "flags"};
  return cols;
}

struct SweepRow {
  double value{0.0};
  bool failed{false};
  std::map<std::string, std::string> fields; // column name -> formatted cell
};

inline SweepRow run_point(const RunConfig& cfg, double swept_value) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRow row;
  row.value = swept_value;
  auto put = [&](const std::string& k, double v) {
    row.fields[k] = format_value(v);
  };
  put("value", swept_value);
  try {
    const PointOutputs p = compute_point(cfg);
    put("A", p.machine.franck_condon);
    put("Omega_r", p.machine.omega_r);
    put("G1_delta", evaluate_spectrum(p.G1, p.machine.delta));
    put("G2_omega0", evaluate_spectrum(p.G2.spectrum, cfg.omega0));
    put("beta_omega0", p.report.beta_eff);
    put("lambda_omega0", p.report.lambda);
    put("J1", p.report.J1);
    put("J2", p.report.J2);
    put("P", p.report.P);
    put("J_C", p.report.J_C);
    put("eta", p.report.eta);
    put("eta_naive", p.report.eta_naive);
    put("eta_carnot", p.report.eta_carnot);
    row.fields["regime"] = regime_name(p.report.regime);
    put("residual", p.steady ? p.steady->residual : 0.0);
    std::string flags;
    for (const auto& f : p.flags) flags += (flags.empty() ? "" : ";") + f;
    row.fields["flags"] = flags.empty() ? "-" : flags;
  } catch (const ConfigError&) {
    throw; // configuration problems abort the whole run
  } catch (const std::exception& e) {
    row.failed = true;
    for (const auto& c : sweep_columns())
      if (!row.fields.count(c)) put(c, nan);
    row.fields["regime"] = "-";
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == ',' || ch == '\n') ch = ' ';
    row.fields["flags"] = "failed:" + msg;
  }
  return row;
}

inline std::vector<std::string> selected_columns(const RunConfig& cfg) {
  if (cfg.output.columns.empty()) return sweep_columns();
  for (const auto& c : cfg.output.columns) {
    bool known = false;
    for (const auto& k : sweep_columns()) known = known || k == c;
    if (!known) throw ConfigError("output.columns: unknown column '" + c + "'");
  }
  return cfg.output.columns;
}

inline void write_csv(std::ostream& os, const RunConfig& cfg,
                      const std::vector<SweepRow>& rows) {
  const auto cols = selected_columns(cfg);
  os << "# polaron-qhm v1\n";
  for (size_t i = 0; i < cols.size(); ++i)
    os << cols[i] << (i + 1 < cols.size() ? "," : "\n");
  for (const auto& r : rows) {
    for (size_t i = 0; i < cols.size(); ++i) {
      const auto it = r.fields.find(cols[i]);
      os << (it == r.fields.end() ? "nan" : it->second)
         << (i + 1 < cols.size() ? "," : "\n");
    }
  }
}

// ---------------------------------------------------------------------- SVG

// Dependency-free single-polyline plot of one column vs the swept value.
inline void write_svg(std::ostream& os, const std::vector<double>& xs,
                      const std::vector<double>& ys, bool xlog,
                      const std::string& xlabel, const std::string& ylabel) {
  const int W = 800, H = 500, ML = 70, MR = 20, MT = 20, MB = 50;
  std::vector<double> xv, yv;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double x = xlog ? std::log10(xs[i]) : xs[i];
    if (std::isfinite(x) && std::isfinite(ys[i])) {
      xv.push_back(x);
      yv.push_back(ys[i]);
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!xv.empty()) {
    x0 = x1 = xv[0];
    y0 = y1 = yv[0];
    for (size_t i = 1; i < xv.size(); ++i) {
      x0 = std::min(x0, xv[i]); x1 = std::max(x1, xv[i]);
      y0 = std::min(y0, yv[i]); y1 = std::max(y1, yv[i]);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  char lbl[64];
  for (int t = 0; t <= 4; ++t) {
    const double xt = x0 + (x1 - x0) * t / 4.0;
    const double yt = y0 + (y1 - y0) * t / 4.0;
    std::snprintf(lbl, sizeof(lbl), "%.3g", xlog ? std::pow(10.0, xt) : xt);
    os << "<text x=\"" << px(xt) << "\" y=\"" << H - MB + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << lbl << "</text>\n";
    std::snprintf(lbl, sizeof(lbl), "%.3g", yt);
    os << "<text x=\"" << ML - 6 << "\" y=\"" << py(yt) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << lbl << "</text>\n";
  }
  os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
     << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel
     << (xlog ? " (log)" : "") << "</text>\n";
  os << "<text x=\"14\" y=\"" << (MT + H - MB) / 2
     << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << (MT + H - MB) / 2 << ")\">" << ylabel << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" "
        "points=\"";
  for (size_t i = 0; i < xv.size(); ++i)
    os << px(xv[i]) << "," << py(yv[i]) << " ";
  os << "\"/>\n</svg>\n";
}

// ---------------------------------------------------------------- run_sweep

// Grid points are independent; with threads > 1 they are evaluated
// concurrently but always assembled in grid order. Returns exit code
// (0 success, 2 if every point failed).
inline int run_sweep(const RunConfig& cfg, std::ostream& csv_os,
                     std::ostream* svg_os, int threads = 1) {
  const auto grid = sweep_grid(cfg.sweep);
  std::vector<SweepRow> rows(grid.size());

  auto work = [&](size_t begin, size_t stride) {
    for (size_t i = begin; i < grid.size(); i += stride) {
      RunConfig point = cfg;
      apply_sweep_value(point, cfg.sweep.parameter, grid[i]);
      rows[i] = run_point(point, grid[i]);
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(work, static_cast<size_t>(t),
                        static_cast<size_t>(threads));
    for (auto& th : pool) th.join();
  }

  write_csv(csv_os, cfg, rows);

  if (svg_os) {
    const std::string col = cfg.output.svg_column;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      xs.push_back(r.value);
      const auto it = r.fields.find(col);
      ys.push_back(it == r.fields.end()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : std::strtod(it->second.c_str(), nullptr));
    }
    write_svg(*svg_os, xs, ys, cfg.sweep.scale == "log", cfg.sweep.parameter,
              col);
  }

  bool all_failed = true;
  for (const auto& r : rows) all_failed = all_failed && r.failed;
  return all_failed ? 2 : 0;
}

// -------------------------------------------------------------------- check

struct CheckResult {
  std::string name;
  double measured{0.0};
  double tolerance{0.0};
  bool pass{true};
};

// Read a two-column (frequency,weight) CSV back into a LineSpectrum,
// e.g. for fault injection into the KMS check.
inline LineSpectrum read_spectrum_csv(const std::string& path, double eta) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum CSV: " + path);
  LineSpectrum s;
  s.broadening_eta = eta;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || std::isalpha(line[0])) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError("spectrum CSV: expected 'frequency,weight' in " + path);
    s.lines.push_back({std::strtod(line.substr(0, comma).c_str(), nullptr),
                       std::strtod(line.substr(comma + 1).c_str(), nullptr)});
  }
  std::sort(s.lines.begin(), s.lines.end(),
            [](const SpectralLine& a, const SpectralLine& b) {
              return a.frequency < b.frequency;
            });
  return s;
}

inline std::vector<CheckResult> run_check(
    const RunConfig& cfg, const LineSpectrum* injected_g1 = nullptr) {
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, double measured, double tol) {
    out.push_back({name, measured, tol, measured <= tol});
  };

  const PointOutputs p = compute_point(cfg);
  const double tol = 1e-9 * cfg.omega0;

  // sum rules
  const double A = p.machine.franck_condon;
  const double expected_g1 =
      2.0 * M_PI * 0.25 * cfg.Omega * cfg.Omega * (1.0 - A * A);
  const double g1_total = p.G1.total_weight();
  add("g1-sum-rule",
      std::abs(g1_total - expected_g1) / std::max(expected_g1, 1e-300), 1e-9);
  const HarmonicWeights ladder =
      cold_harmonics(cfg.cold, true, cfg.numerics.bessel_tol, tol);
  add("cold-ladder-total", std::abs(ladder.total() - 1.0), 1e-9);

  // detailed balance
  const LineSpectrum& g1 = injected_g1 ? *injected_g1 : p.G1;
  if (std::isinf(cfg.cold.beta) || g1.lines.empty()) {
    add("kms-g1", 0.0, 1e-9);
  } else {
    const KmsReport kr =
        check_kms(g1, cfg.cold.beta, cfg.numerics.weight_floor, tol);
    add("kms-g1", kr.max_violation + (injected_g1 && kr.paired_lines == 0
                                          ? 1.0 // corrupt file broke pairing
                                          : 0.0),
        1e-9);
  }
  const GeneralizedKmsReport gk = generalized_kms_check(
      p.G2.spectrum, p.G2.decomposition, cfg.cold.beta, cfg.hot.beta,
      cfg.numerics.weight_floor, tol);
  add("generalized-kms-g2",
      std::max(gk.max_line_violation, gk.max_term_violation), 1e-9);

  // decomposition alignment with the spectrum lines
  double align = 0.0;
  if (p.G2.spectrum.lines.size() == p.G2.decomposition.entries.size()) {
    for (size_t i = 0; i < p.G2.spectrum.lines.size(); ++i) {
      const double w = p.G2.spectrum.lines[i].weight;
      align = std::max(align,
                       std::abs(p.G2.decomposition.entries[i].total() - w) /
                           std::max(w, 1e-300));
    }
  } else {
    align = 1.0;
  }
  add("g2-decomposition-alignment", align, 1e-12);

  // Fourier completeness per channel
  Matrix2c s1 = Matrix2c::Zero(), s2 = Matrix2c::Zero();
  for (const auto& c : p.components)
    (c.channel == 1 ? s1 : s2) += c.op;
  double comp = 0.0;
  if (cfg.Omega != 0.0) comp = (s1 - pauli::sx()).cwiseAbs().maxCoeff();
  comp = std::max(comp,
                  (s2 - (pauli::sp() + pauli::sm())).cwiseAbs().maxCoeff());
  add("fourier-completeness", comp, 1e-12);

  // steady state quality and first law
  if (p.steady) {
    add("steady-residual", p.steady->residual, 1e-10);
    add("steady-trace-error", p.steady->trace_error, 1e-12);
    add("steady-positivity", std::max(0.0, -p.steady->min_eigenvalue), 1e-12);

    const double jscale =
        std::max({std::abs(p.currents.J1), std::abs(p.currents.J2), 1e-300});
    add("first-law", std::abs(p.currents.P + p.currents.J1 + p.currents.J2) /
                         jscale,
        1e-12);
    const Currents redo = currents_and_power(p.L, p.steady->rho);
    add("currents-recompute",
        std::max(std::abs(redo.J1 - p.currents.J1),
                 std::abs(redo.J2 - p.currents.J2)) /
            jscale,
        1e-12);
  } else {
    add("steady-residual", 0.0, 1e-10);
    add("first-law", 0.0, 1e-12);
  }

  // second law
  if (std::abs(cfg.cold.beta - cfg.hot.beta) < 1e-12) {
    add("single-temperature-no-work", std::max(0.0, -p.currents.P), 1e-12);
  } else if (p.report.regime == Regime::engine &&
             std::isfinite(p.report.eta)) {
    add("carnot-engine", std::max(0.0, p.report.eta - p.report.eta_carnot),
        1e-9);
  } else if (p.report.regime == Regime::refrigerator && p.currents.P > 0.0) {
    const double cop = p.report.J_C / p.currents.P;
    const double cop_carnot =
        cfg.hot.beta / (cfg.cold.beta - cfg.hot.beta);
    add("carnot-refrigerator", std::max(0.0, cop - cop_carnot), 1e-9);
  } else {
    add("carnot-regime", 0.0, 1e-9);
  }
  return out;
}

inline bool write_check_report(std::ostream& os,
                               const std::vector<CheckResult>& checks) {
  bool all_pass = true;
  os << "invariant,measured,tolerance,status\n";
  for (const auto& c : checks) {
    os << c.name << "," << format_value(c.measured) << ","
       << format_value(c.tolerance) << "," << (c.pass ? "pass" : "FAIL")
       << "\n";
    all_pass = all_pass && c.pass;
  }
  return all_pass;
}

} // namespace qhm
