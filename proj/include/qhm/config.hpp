// config.hpp — flat key-value run configuration: parsing, defaults,
// validation, and --set overrides.
//
// Grammar: one `key = value` pair per line; `#` starts a comment; blank
// lines ignored. Keys are dotted paths (machine.omega0, cold.xi, ...);
// list values are space-separated. `inf` is accepted for inverse
// temperatures (the T = 0 sentinel). Unknown keys are rejected.
#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qhm/bath.hpp"

namespace qhm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  bool present{false};
  std::string parameter; // xi_c | xi_h | xi_both | omega_l | Omega | beta_C | beta_H
  double from{0.0};
  double to{0.0};
  int points{0};
  std::string scale{"linear"}; // linear | log
};

struct OutputSpec {
  std::string csv_path;
  std::string svg_path;              // optional
  std::string svg_column{"P"};       // column plotted against the swept value
  std::vector<std::string> columns;  // optional subset; empty = full schema
};

struct NumericsSpec {
  double broadening_eta{-1.0}; // < 0 means "default to 1e-2 * omega0"
  double bessel_tol{1e-12};
  double rank_tol{1e-10};
  double weight_floor{1e-14};

  double eta(double omega0) const {
    return broadening_eta > 0.0 ? broadening_eta : 1e-2 * omega0;
  }
};

struct RunConfig {
  double omega0{0.0};
  double omega_l{0.0};
  double Omega{0.0};
  BathSpec cold;
  BathSpec hot;
  NumericsSpec numerics;
  SweepSpec sweep;
  OutputSpec output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return kInfiniteBeta;
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse number '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(key, tok));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

} // namespace detail

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config_text(std::istream& in) {
  ConfigMap kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": empty key or value");
    if (kv.count(key))
      throw ConfigError(key + ": duplicate key");
    kv[key] = val;
  }
  return kv;
}

// Apply a single `--set key=value` override onto the raw map.
inline void apply_override(ConfigMap& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set: expected key=value, got '" + assignment + "'");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string val = detail::trim(assignment.substr(eq + 1));
  if (key.empty() || val.empty())
    throw ConfigError("--set: empty key or value in '" + assignment + "'");
  kv[key] = val;
}

inline RunConfig config_from_map(ConfigMap kv) {
  RunConfig cfg;
  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(key + ": missing required key");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_opt = [&](const std::string& key, std::string* out) {
    auto it = kv.find(key);
    if (it == kv.end()) return false;
    *out = it->second;
    kv.erase(it);
    return true;
  };

  using detail::parse_double;
  using detail::parse_list;

  cfg.omega0 = parse_double("machine.omega0", take("machine.omega0"));
  cfg.omega_l = parse_double("machine.omega_l", take("machine.omega_l"));
  cfg.Omega = parse_double("machine.Omega", take("machine.Omega"));

  auto load_bath = [&](const std::string& sec, BathLabel label) {
    BathSpec b;
    b.label = label;
    b.xi = parse_double(sec + ".xi", take(sec + ".xi"));
    b.beta = parse_double(sec + ".beta", take(sec + ".beta"));
    const auto freqs =
        parse_list(sec + ".mode_frequencies", take(sec + ".mode_frequencies"));
    const auto gs =
        parse_list(sec + ".mode_couplings", take(sec + ".mode_couplings"));
    if (freqs.size() != gs.size())
      throw ConfigError(sec + ": mode_frequencies and mode_couplings must "
                              "have equal length");
    for (size_t i = 0; i < freqs.size(); ++i)
      b.modes.push_back({freqs[i], gs[i]});
    try {
      b.validate();
    } catch (const std::exception& e) {
      throw ConfigError(sec + ": " + e.what());
    }
    return b;
  };
  cfg.cold = load_bath("cold", BathLabel::cold);
  cfg.hot = load_bath("hot", BathLabel::hot);

  std::string v;
  if (take_opt("numerics.broadening_eta", &v)) {
    cfg.numerics.broadening_eta = parse_double("numerics.broadening_eta", v);
    if (!(cfg.numerics.broadening_eta > 0.0))
      throw ConfigError("numerics.broadening_eta: must be > 0");
  }
  if (take_opt("numerics.bessel_tol", &v)) {
    cfg.numerics.bessel_tol = parse_double("numerics.bessel_tol", v);
    if (!(cfg.numerics.bessel_tol > 0.0))
      throw ConfigError("numerics.bessel_tol: must be > 0");
  }
  if (take_opt("numerics.rank_tol", &v)) {
    cfg.numerics.rank_tol = parse_double("numerics.rank_tol", v);
    if (!(cfg.numerics.rank_tol > 0.0))
      throw ConfigError("numerics.rank_tol: must be > 0");
  }
  if (take_opt("numerics.weight_floor", &v)) {
    cfg.numerics.weight_floor = parse_double("numerics.weight_floor", v);
    if (!(cfg.numerics.weight_floor >= 0.0))
      throw ConfigError("numerics.weight_floor: must be >= 0");
  }

  const bool has_sweep = kv.count("sweep.parameter") > 0;
  if (has_sweep) {
    cfg.sweep.present = true;
    cfg.sweep.parameter = take("sweep.parameter");
    static const std::vector<std::string> allowed = {
        "xi_c", "xi_h", "xi_both", "omega_l", "Omega", "beta_C", "beta_H"};
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == cfg.sweep.parameter;
    if (!ok)
      throw ConfigError("sweep.parameter: unknown parameter '" +
                        cfg.sweep.parameter + "'");
    cfg.sweep.from = parse_double("sweep.from", take("sweep.from"));
    cfg.sweep.to = parse_double("sweep.to", take("sweep.to"));
    cfg.sweep.points =
        static_cast<int>(parse_double("sweep.points", take("sweep.points")));
    if (take_opt("sweep.scale", &v)) cfg.sweep.scale = v;
    if (cfg.sweep.scale != "linear" && cfg.sweep.scale != "log")
      throw ConfigError("sweep.scale: must be 'linear' or 'log'");
    if (!(cfg.sweep.from < cfg.sweep.to))
      throw ConfigError("sweep.from: requires from < to");
    if (cfg.sweep.points < 2)
      throw ConfigError("sweep.points: requires points >= 2");
    if (cfg.sweep.scale == "log" && !(cfg.sweep.from > 0.0))
      throw ConfigError("sweep.from: log scale requires from > 0");
  }

  take_opt("output.csv_path", &cfg.output.csv_path);
  take_opt("output.svg_path", &cfg.output.svg_path);
  take_opt("output.svg_column", &cfg.output.svg_column);
  if (take_opt("output.columns", &v)) {
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) cfg.output.columns.push_back(tok);
  }

  if (!kv.empty()) throw ConfigError(kv.begin()->first + ": unknown key");

  if (!(cfg.omega0 > 0.0)) throw ConfigError("machine.omega0: must be > 0");
  if (!(cfg.omega_l >= 0.0)) throw ConfigError("machine.omega_l: must be >= 0");
  if (!(cfg.Omega >= 0.0)) throw ConfigError("machine.Omega: must be >= 0");
  return cfg;
}

inline ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config_text(in);
}

inline RunConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {}) {
  ConfigMap kv = read_config_file(path);
  for (const auto& o : overrides) apply_override(kv, o);
  return config_from_map(std::move(kv));
}

} // namespace qhm
