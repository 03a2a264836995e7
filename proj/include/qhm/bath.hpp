// bath.hpp — discrete bosonic baths: thermal factors, free correlation
// functions, and weak-coupling (untransformed) line spectra.
//
// Units: hbar = k_B = 1 throughout. Temperatures enter as inverse
// temperatures beta; beta = +infinity is the T = 0 sentinel.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "qhm/spectrum.hpp"

namespace qhm {

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

struct BathMode {
  double frequency{1.0}; // omega_k > 0
  double coupling{0.0};  // ||g_k|| >= 0 (only the magnitude ever enters)
};

enum class BathLabel { cold, hot };

struct BathSpec {
  std::vector<BathMode> modes;
  double xi{0.0};  // overall dimensionless coupling scale, >= 0
  double beta{kInfiniteBeta};
  BathLabel label{BathLabel::cold};

  void validate() const {
    if (modes.empty() || modes.size() > 8)
      throw InvalidArgumentError("bath: need 1..8 modes");
    for (const auto& m : modes) {
      if (!(m.frequency > 0.0))
        throw InvalidArgumentError("bath: mode frequencies must be > 0");
      if (!(m.coupling >= 0.0))
        throw InvalidArgumentError("bath: mode couplings must be >= 0");
    }
    if (!(xi >= 0.0)) throw InvalidArgumentError("bath: xi must be >= 0");
    if (!(beta > 0.0)) // +inf passes
      throw InvalidArgumentError("bath: beta must be > 0 (or inf)");
  }
};

// coth(beta*omega/2); 1 at beta = inf. Requires omega > 0.
inline double thermal_coth(double beta, double omega) {
  if (!(omega > 0.0))
    throw InvalidArgumentError("thermal_coth: omega must be > 0");
  if (!(beta > 0.0))
    throw InvalidArgumentError("thermal_coth: beta must be > 0");
  if (std::isinf(beta)) return 1.0;
  return 1.0 / std::tanh(0.5 * beta * omega);
}

// Bose occupation nbar = 1/(e^{beta*omega} - 1); 0 at beta = inf.
inline double bose_occupation(double beta, double omega) {
  if (!(omega > 0.0))
    throw InvalidArgumentError("bose_occupation: omega must be > 0");
  if (!(beta > 0.0))
    throw InvalidArgumentError("bose_occupation: beta must be > 0");
  if (std::isinf(beta)) return 0.0;
  return 1.0 / std::expm1(beta * omega);
}

// Free thermal correlation of a single mode (without the xi^2 scale):
// ||g||^2 [ coth(beta w/2) cos(w t) - i sin(w t) ].
inline std::complex<double> mode_correlation(const BathMode& m, double beta,
                                             double t) {
  const double g2 = m.coupling * m.coupling;
  const double w = m.frequency;
  return {g2 * thermal_coth(beta, w) * std::cos(w * t),
          -g2 * std::sin(w * t)};
}

// C(t) = xi^2 sum_k mode_correlation_k(t).
inline std::complex<double> weak_correlation(const BathSpec& b, double t) {
  b.validate();
  std::complex<double> c{0.0, 0.0};
  for (const auto& m : b.modes) c += mode_correlation(m, b.beta, t);
  return b.xi * b.xi * c;
}

// Weak-coupling line spectrum: emission line at +omega_k with weight
// 2*pi*xi^2*||g||^2*(nbar+1), absorption line at -omega_k with weight
// 2*pi*xi^2*||g||^2*nbar. Zero-weight lines are dropped.
inline LineSpectrum weak_spectrum(const BathSpec& b, double eta) {
  b.validate();
  std::vector<SpectralLine> lines;
  const double x2 = b.xi * b.xi;
  for (const auto& m : b.modes) {
    const double g2 = m.coupling * m.coupling;
    const double nbar = bose_occupation(b.beta, m.frequency);
    const double we = 2.0 * M_PI * x2 * g2 * (nbar + 1.0);
    const double wa = 2.0 * M_PI * x2 * g2 * nbar;
    if (we > 0.0) lines.push_back({m.frequency, we});
    if (wa > 0.0) lines.push_back({-m.frequency, wa});
  }
  return make_line_spectrum(std::move(lines), eta, 0.0);
}

struct CouplingDiagnostic {
  double gamma_tau{0.0}; // gamma * tau_correlation (inf if non-decaying)
  bool non_decaying{false};
};

// Crude Markovianity figure of merit: gamma * tau_cor where tau_cor is the
// first time after which |C(t)| stays below |C(0)|/e over a long window.
// Few-mode baths are quasi-periodic, so this typically reports non-decaying.
inline CouplingDiagnostic weak_coupling_diagnostic(const BathSpec& b,
                                                   double gamma) {
  b.validate();
  if (!(gamma >= 0.0))
    throw InvalidArgumentError("weak_coupling_diagnostic: gamma must be >= 0");
  const double c0 = std::abs(weak_correlation(b, 0.0));
  if (c0 == 0.0) return {0.0, false};

  double wmin = b.modes.front().frequency;
  for (const auto& m : b.modes) wmin = std::min(wmin, m.frequency);
  const double horizon = 80.0 * 2.0 * M_PI / wmin;
  const int n = 16384;
  const double dt = horizon / n;

  std::vector<double> mag(n + 1);
  for (int i = 0; i <= n; ++i)
    mag[i] = std::abs(weak_correlation(b, i * dt));
  // suffix maximum: sup_{s >= t} |C(s)|
  for (int i = n - 1; i >= 0; --i) mag[i] = std::max(mag[i], mag[i + 1]);

  const double target = c0 / M_E;
  for (int i = 1; i <= n; ++i) {
    if (mag[i] <= target) return {gamma * i * dt, false};
  }
  return {std::numeric_limits<double>::infinity(), true};
}

} // namespace qhm
