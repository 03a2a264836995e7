// kms.hpp — detailed-balance diagnostics and frequency-local effective
// temperatures beta(omega) for composite (two-bath) line spectra.
#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "qhm/bath.hpp"
#include "qhm/spectrum.hpp"

namespace qhm {

struct KmsReport {
  double max_violation{0.0}; // max |W(-w) e^{beta w} / W(+w) - 1|
  int paired_lines{0};
  int unpaired_lines{0}; // lines above floor with no mirror partner
};

// Standard KMS check at a single inverse temperature (channel-1 spectrum).
// Lines below weight_floor * total are ignored; surviving one-sided lines
// are skipped but counted.
inline KmsReport check_kms(const LineSpectrum& s, double beta,
                           double weight_floor, double pair_tol) {
  if (!(beta > 0.0)) throw InvalidArgumentError("check_kms: beta must be > 0");
  KmsReport rep;
  const double floor = weight_floor * s.total_weight();
  for (const auto& ln : s.lines) {
    if (ln.frequency <= pair_tol || ln.weight <= floor) continue;
    const SpectralLine* mirror = s.find(-ln.frequency, pair_tol);
    if (!mirror || mirror->weight <= floor) {
      // at T = 0 the absorption side is empty by construction, not an anomaly
      if (!std::isinf(beta)) ++rep.unpaired_lines;
      continue;
    }
    const double ratio =
        mirror->weight * std::exp(beta * ln.frequency) / ln.weight;
    rep.max_violation = std::max(rep.max_violation, std::abs(ratio - 1.0));
    ++rep.paired_lines;
  }
  return rep;
}

struct LocalTemperature {
  double omega{0.0};
  double beta_eff{0.0};
  double lambda{std::numeric_limits<double>::quiet_NaN()};
  bool degenerate{false}; // beta_C == beta_H: lambda undefined
};

namespace detail {

// e^{-beta * w} with the beta = inf sentinel (w > 0 -> 0, w = 0 -> 1).
inline double boltzmann(double beta, double w) {
  if (std::isinf(beta)) {
    if (w > 0.0) return 0.0;
    if (w == 0.0) return 1.0;
    throw NonConvergenceError(
        "beta(omega): absorption term at zero temperature");
  }
  return std::exp(-beta * w);
}

inline LocalTemperature beta_from_terms(
    const SpectralDecomposition::Entry& entry, double beta_C, double beta_H,
    double weight_floor) {
  const double total = entry.total();
  double s = 0.0;
  for (const auto& t : entry.terms) {
    if (t.weight < weight_floor * total) continue;
    s += (t.weight / total) * boltzmann(beta_H, t.omega_hot) *
         boltzmann(beta_C, t.omega_cold);
  }
  LocalTemperature lt;
  lt.omega = entry.frequency;
  lt.beta_eff = -std::log(s) / entry.frequency;
  lt.degenerate = std::abs(beta_C - beta_H) < 1e-12;
  if (!lt.degenerate)
    lt.lambda = (lt.beta_eff - beta_H) / (beta_C - beta_H);
  return lt;
}

} // namespace detail

// Effective inverse temperature of the line at `omega` (> 0):
// beta(omega) = -ln( sum_terms K e^{-beta_H w_H - beta_C w_C} ) / omega,
// K the term's weight fraction. lambda(omega) is the affine coordinate
// beta(omega) = lambda beta_C + (1 - lambda) beta_H, not clamped to [0,1].
inline LocalTemperature local_temperature_beta(const SpectralDecomposition& d,
                                               double omega, double beta_C,
                                               double beta_H,
                                               double weight_floor,
                                               double tol) {
  if (!(omega > 0.0))
    throw InvalidArgumentError("local_temperature_beta: omega must be > 0");
  const SpectralDecomposition::Entry* e = d.find(omega, tol);
  if (!e || e->total() <= 0.0)
    throw NonConvergenceError("local_temperature_beta: no line at omega");
  return detail::beta_from_terms(*e, beta_C, beta_H, weight_floor);
}

// Weight-averaged beta over all lines within eta of omega (used by the
// pipeline to attach beta(omega0) to a machine working point).
inline std::optional<LocalTemperature> local_temperature_near(
    const SpectralDecomposition& d, double omega, double eta, double beta_C,
    double beta_H, double weight_floor) {
  double wsum = 0.0, bsum = 0.0;
  for (const auto& e : d.entries) {
    if (std::abs(e.frequency - omega) > eta) continue;
    const double w = e.total();
    if (w <= 0.0) continue;
    bsum += w * detail::beta_from_terms(e, beta_C, beta_H, weight_floor).beta_eff;
    wsum += w;
  }
  if (wsum <= 0.0) return std::nullopt;
  LocalTemperature lt;
  lt.omega = omega;
  lt.beta_eff = bsum / wsum;
  lt.degenerate = std::abs(beta_C - beta_H) < 1e-12;
  if (!lt.degenerate) lt.lambda = (lt.beta_eff - beta_H) / (beta_C - beta_H);
  return lt;
}

struct GeneralizedKmsReport {
  double max_line_violation{0.0}; // mirror weights vs e^{-beta(w) w}
  double max_term_violation{0.0}; // per (w_H, w_C) term detailed balance
  int paired_lines{0};
  int unpaired_lines{0};
};

// Generalized KMS: for every positive line, the mirror line at -omega must
// satisfy W(-w) = e^{-beta(w) w} W(+w) with the local beta(w), and each
// (w_H, w_C) term must mirror onto (-w_H, -w_C) with factor
// e^{-beta_H w_H - beta_C w_C}.
inline GeneralizedKmsReport generalized_kms_check(const LineSpectrum& s,
                                                  const SpectralDecomposition& d,
                                                  double beta_C, double beta_H,
                                                  double weight_floor,
                                                  double pair_tol) {
  GeneralizedKmsReport rep;
  const double floor = weight_floor * s.total_weight();
  const bool any_zero_temp = std::isinf(beta_C) || std::isinf(beta_H);
  for (const auto& e : d.entries) {
    const double w = e.frequency;
    const double tw = e.total();
    if (w <= pair_tol || tw <= floor) continue;
    const SpectralDecomposition::Entry* mirror = d.find(-w, pair_tol);
    if (!mirror || mirror->total() <= floor) {
      if (!any_zero_temp) ++rep.unpaired_lines;
      continue;
    }
    const LocalTemperature lt =
        detail::beta_from_terms(e, beta_C, beta_H, weight_floor);
    const double predicted = std::isinf(lt.beta_eff)
                                 ? 0.0
                                 : tw * std::exp(-lt.beta_eff * w);
    rep.max_line_violation = std::max(
        rep.max_line_violation, std::abs(mirror->total() / predicted - 1.0));
    ++rep.paired_lines;

    for (const auto& t : e.terms) {
      if (t.weight <= floor) continue;
      for (const auto& mt : mirror->terms) {
        if (std::abs(mt.omega_hot + t.omega_hot) <= pair_tol &&
            std::abs(mt.omega_cold + t.omega_cold) <= pair_tol) {
          const double pred = t.weight *
                              detail::boltzmann(beta_H, t.omega_hot) *
                              detail::boltzmann(beta_C, t.omega_cold);
          if (pred > 0.0)
            rep.max_term_violation = std::max(rep.max_term_violation,
                                              std::abs(mt.weight / pred - 1.0));
          break;
        }
      }
    }
  }
  return rep;
}

} // namespace qhm
