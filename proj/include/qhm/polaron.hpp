// polaron.hpp — polaron dressing of the cold bath: Franck-Condon factor,
// transformed correlation functions, and their exact harmonic line weights.
//
// For a single cold mode (omega, g) at inverse temperature beta with overall
// scale xi, the dressed correlation C_A(t) = A^2 exp(4 xi^2 Lambda(t)/omega^2)
// is exactly periodic and its Fourier weights W_n (line at +n*omega carrying
// the e^{-i n omega t} coefficient) form a generalized Skellam distribution:
//
//   W_n = e^{-(a+b)} (b/a)^{n/2} I_n(2 sqrt(a b)),  a = z*nbar, b = z*(nbar+1),
//   z = 4 xi^2 ||g/omega||^2,  nbar = 1/(e^{beta omega} - 1).
//
// Detailed balance W_{-n} = e^{-n beta omega} W_n and the sum rule
// sum_n W_n = 1 hold exactly. At beta = inf this degenerates to a Poisson
// ladder on n >= 0. Weights are evaluated from the double series in log
// space (no Bessel overflow, exact Poisson limit at a = 0).
#pragma once

#include <cmath>
#include <vector>

#include "qhm/bath.hpp"
#include "qhm/spectrum.hpp"

namespace qhm {

inline constexpr int kHarmonicCap = 400; // hard truncation of |n|

// A = exp(-2 xi^2 sum_k ||g_k/omega_k||^2 coth(beta omega_k / 2)).
inline double franck_condon(const BathSpec& cold) {
  cold.validate();
  double s = 0.0;
  for (const auto& m : cold.modes) {
    const double r = m.coupling / m.frequency;
    s += r * r * thermal_coth(cold.beta, m.frequency);
  }
  return std::exp(-2.0 * cold.xi * cold.xi * s);
}

inline double renormalized_rabi(double Omega, double A) { return Omega * A; }

// phi(t) = 4 xi^2 sum_k Lambda_k(t) / omega_k^2 (complex), so that
// C_A(t) = A^2 exp(phi(t)) and C_A(0) = 1.
inline std::complex<double> polaron_exponent(const BathSpec& cold, double t) {
  cold.validate();
  std::complex<double> s{0.0, 0.0};
  for (const auto& m : cold.modes)
    s += mode_correlation(m, cold.beta, t) / (m.frequency * m.frequency);
  return 4.0 * cold.xi * cold.xi * s;
}

inline std::complex<double> transformed_cold_correlation(const BathSpec& cold,
                                                         double t) {
  const double A = franck_condon(cold);
  return A * A * std::exp(polaron_exponent(cold, t));
}

// Channel-1 polaron correlation (Omega/2)^2 A^2 (exp(phi) - 1): the dressed
// drive correlation with its elastic (constant) part removed.
inline std::complex<double> transformed_correlation_1(const BathSpec& cold,
                                                      double Omega, double t) {
  const double A = franck_condon(cold);
  const double pre = 0.25 * Omega * Omega * A * A;
  return pre * (std::exp(polaron_exponent(cold, t)) - 1.0);
}

struct HarmonicWeights {
  std::vector<SpectralLine> lines; // sorted by frequency
  bool elastic_included{true};

  double total() const {
    double s = 0.0;
    for (const auto& ln : lines) s += ln.weight;
    return s;
  }
};

namespace detail {

// log of sum_k exp(k*la + (k+n)*lb - lgamma(k+1) - lgamma(k+n+1)), the
// unnormalized log-weight of harmonic n >= 0. la = -inf (a = 0) keeps k = 0.
inline double log_weight_series(int n, double la, double lb) {
  auto lterm = [&](int k) {
    return k * la + (k + n) * lb - std::lgamma(k + 1.0) -
           std::lgamma(k + n + 1.0);
  };
  if (std::isinf(la)) return n * lb - std::lgamma(n + 1.0); // k = 0 only
  // peak of the term sequence in k
  const double ab = std::exp(la + lb);
  int kstar = static_cast<int>(
      std::max(0.0, 0.5 * (-(n + 1.0) + std::sqrt((n + 1.0) * (n + 1.0) +
                                                  4.0 * ab))));
  const double m = lterm(kstar);
  double s = 0.0;
  for (int k = kstar; k >= 0; --k) {
    const double t = std::exp(lterm(k) - m);
    s += t;
    if (t < 1e-20) break;
  }
  for (int k = kstar + 1;; ++k) {
    const double t = std::exp(lterm(k) - m);
    s += t;
    if (t < 1e-20) break;
  }
  return m + std::log(s);
}

} // namespace detail

// Exact harmonic weights of one dressed mode, elastic line included.
// Throws NonConvergenceError if |n| = kHarmonicCap is reached before the
// boundary weight falls below bessel_tol.
inline HarmonicWeights single_mode_harmonics(const BathMode& m, double xi,
                                             double beta, double bessel_tol) {
  if (!(bessel_tol > 0.0))
    throw InvalidArgumentError("harmonics: bessel_tol must be > 0");
  const double w = m.frequency;
  const double r = m.coupling / w;
  const double z = 4.0 * xi * xi * r * r;

  HarmonicWeights hw;
  hw.elastic_included = true;
  if (z == 0.0) {
    hw.lines = {{0.0, 1.0}};
    return hw;
  }

  const bool zero_temp = std::isinf(beta);
  const double nbar = bose_occupation(beta, w);
  const double a = z * nbar;
  const double b = z * (nbar + 1.0);
  const double la = a > 0.0 ? std::log(a)
                            : -std::numeric_limits<double>::infinity();
  const double lb = std::log(b);
  const double c = thermal_coth(beta, w);

  const int n_est = static_cast<int>(std::ceil(z + 12.0 * std::sqrt(z * c))) + 30;
  const int N = std::min(n_est, kHarmonicCap);

  // log-weights for n in [-N, N]; detailed balance fixes the negative side.
  std::vector<double> lw(2 * N + 1);
  double lmax = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= N; ++n) {
    const double l = detail::log_weight_series(n, la, lb);
    lw[N + n] = l;
    lmax = std::max(lmax, l);
    if (n > 0) {
      lw[N - n] = zero_temp ? -std::numeric_limits<double>::infinity()
                            : l - n * beta * w;
      lmax = std::max(lmax, lw[N - n]);
    }
  }
  double norm = 0.0;
  for (double l : lw) norm += std::exp(l - lmax);
  norm = lmax + std::log(norm);

  std::vector<double> weights(2 * N + 1);
  for (int i = 0; i < 2 * N + 1; ++i) weights[i] = std::exp(lw[i] - norm);

  // boundary must have decayed below tolerance, else the cap was too small
  if (weights[2 * N] > bessel_tol)
    throw NonConvergenceError(
        "harmonic series not converged within |n| <= cap; boundary weight " +
        std::to_string(weights[2 * N]));

  // Retention must be mirror-symmetric: dropping -n while keeping +n would
  // break exact detailed balance of everything built on this ladder, so a
  // +-n pair is kept or dropped together (judged by its larger member).
  const double drop = bessel_tol * 1e-4; // cumulative residual << bessel_tol
  for (int n = -N; n <= N; ++n) {
    const double wt = weights[N + n];
    if (n == 0 || (weights[N + std::abs(n)] >= drop && wt > 0.0))
      hw.lines.push_back({n * w, wt});
  }
  return hw;
}

// Single-mode convenience wrapper matching the module interface.
inline HarmonicWeights harmonic_weights(const BathSpec& cold,
                                        bool include_elastic,
                                        double bessel_tol) {
  cold.validate();
  if (cold.modes.size() != 1)
    throw InvalidArgumentError(
        "harmonic_weights: single-mode only; use cold_harmonics for "
        "composite baths");
  HarmonicWeights hw =
      single_mode_harmonics(cold.modes[0], cold.xi, cold.beta, bessel_tol);
  if (!include_elastic) {
    const double A = franck_condon(cold);
    for (auto& ln : hw.lines) {
      if (ln.frequency == 0.0) ln.weight = std::max(0.0, ln.weight - A * A);
    }
    hw.elastic_included = false;
  }
  return hw;
}

// Frequency convolution of two harmonic ladders (product of correlations).
inline HarmonicWeights convolve_weights(const HarmonicWeights& x,
                                        const HarmonicWeights& y,
                                        double merge_tol, double drop) {
  std::vector<SpectralLine> lines;
  lines.reserve(x.lines.size() * y.lines.size());
  for (const auto& lx : x.lines) {
    for (const auto& ly : y.lines) {
      const double wt = lx.weight * ly.weight;
      if (wt >= drop || (lx.frequency == 0.0 && ly.frequency == 0.0))
        lines.push_back({lx.frequency + ly.frequency, wt});
    }
  }
  HarmonicWeights out;
  out.lines = merge_lines(std::move(lines), merge_tol);
  out.elastic_included = x.elastic_included && y.elastic_included;
  return out;
}

namespace detail {

// Mirror-symmetric weight floor on a sorted ladder: a +-f pair of lines is
// dropped only when both members fall below `drop`, so exact detailed
// balance survives truncation.
inline void prune_line_pairs(HarmonicWeights& hw, double pair_tol,
                             double drop) {
  const auto& lines = hw.lines; // sorted ascending by merge_lines
  auto mirror_weight = [&](double f) {
    auto it = std::lower_bound(
        lines.begin(), lines.end(), -f - pair_tol,
        [](const SpectralLine& ln, double v) { return ln.frequency < v; });
    double w = 0.0;
    for (; it != lines.end() && it->frequency <= -f + pair_tol; ++it)
      w = std::max(w, it->weight);
    return w;
  };
  std::vector<SpectralLine> kept;
  kept.reserve(lines.size());
  for (const auto& ln : lines) {
    if (std::abs(ln.frequency) <= pair_tol ||
        std::max(ln.weight, mirror_weight(ln.frequency)) >= drop)
      kept.push_back(ln);
  }
  hw.lines = std::move(kept);
}

} // namespace detail

// Full composite ladder of a multimode cold bath (product over modes).
inline HarmonicWeights cold_harmonics(const BathSpec& cold,
                                      bool include_elastic, double bessel_tol,
                                      double merge_tol) {
  cold.validate();
  const double drop = bessel_tol * 1e-4;
  HarmonicWeights acc;
  acc.lines = {{0.0, 1.0}};
  acc.elastic_included = true;
  for (const auto& m : cold.modes) {
    acc = convolve_weights(
        acc, single_mode_harmonics(m, cold.xi, cold.beta, bessel_tol),
        merge_tol, /*drop=*/0.0);
    detail::prune_line_pairs(acc, merge_tol, drop);
  }
  if (!include_elastic) {
    const double A = franck_condon(cold);
    for (auto& ln : acc.lines) {
      if (std::abs(ln.frequency) <= merge_tol)
        ln.weight = std::max(0.0, ln.weight - A * A);
    }
    acc.elastic_included = false;
  }
  return acc;
}

// Channel-1 spectrum: lines 2 pi (Omega/2)^2 (W_n - A^2 delta_{n0}).
// Total weight is exactly 2 pi (Omega/2)^2 (1 - A^2).
inline LineSpectrum spectrum_G1(const BathSpec& cold, double Omega, double eta,
                                double bessel_tol, double merge_tol) {
  std::vector<SpectralLine> lines;
  if (Omega != 0.0 && cold.xi != 0.0) {
    const HarmonicWeights hw =
        cold_harmonics(cold, /*include_elastic=*/false, bessel_tol, merge_tol);
    const double pre = 2.0 * M_PI * 0.25 * Omega * Omega;
    for (const auto& ln : hw.lines)
      if (ln.weight > 0.0) lines.push_back({ln.frequency, pre * ln.weight});
  }
  return make_line_spectrum(std::move(lines), eta, merge_tol);
}

struct SpectrumWithDecomposition {
  LineSpectrum spectrum;
  SpectralDecomposition decomposition;
};

// Channel-2 spectrum: convolution of the hot weak-coupling lines with the
// full cold ladder (elastic line included). The decomposition keeps the
// (omega_hot, omega_cold) split of every merged line for local-temperature
// analysis; entries are aligned one-to-one with the spectrum lines.
inline SpectrumWithDecomposition spectrum_G2(const BathSpec& cold,
                                             const BathSpec& hot, double eta,
                                             double bessel_tol,
                                             double merge_tol) {
  const LineSpectrum hotS = weak_spectrum(hot, eta);
  const HarmonicWeights ladder =
      cold_harmonics(cold, /*include_elastic=*/true, bessel_tol, merge_tol);

  std::vector<DecompositionTerm> terms;
  terms.reserve(hotS.lines.size() * ladder.lines.size());
  for (const auto& lh : hotS.lines) {
    for (const auto& lc : ladder.lines) {
      const double wt = lh.weight * lc.weight;
      if (wt > 0.0) terms.push_back({lh.frequency, lc.frequency, wt});
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const DecompositionTerm& p, const DecompositionTerm& q) {
              return p.omega_hot + p.omega_cold < q.omega_hot + q.omega_cold;
            });

  SpectrumWithDecomposition out;
  std::vector<SpectralLine> lines;
  for (const auto& t : terms) {
    const double f = t.omega_hot + t.omega_cold;
    if (!lines.empty() && f - lines.back().frequency <= merge_tol &&
        !out.decomposition.entries.empty()) {
      auto& ln = lines.back();
      const double w = ln.weight + t.weight;
      ln.frequency = (ln.frequency * ln.weight + f * t.weight) / w;
      ln.weight = w;
      auto& entry = out.decomposition.entries.back();
      entry.frequency = ln.frequency;
      // merge with an identical (omega_hot, omega_cold) term if present
      bool merged = false;
      for (auto& et : entry.terms) {
        if (std::abs(et.omega_hot - t.omega_hot) <= merge_tol &&
            std::abs(et.omega_cold - t.omega_cold) <= merge_tol) {
          et.weight += t.weight;
          merged = true;
          break;
        }
      }
      if (!merged) entry.terms.push_back(t);
    } else {
      lines.push_back({f, t.weight});
      out.decomposition.entries.push_back({f, {t}});
    }
  }
  out.spectrum.lines = std::move(lines);
  out.spectrum.broadening_eta = eta;
  if (!(eta > 0.0))
    throw InvalidArgumentError("spectrum_G2: broadening eta must be > 0");
  return out;
}

} // namespace qhm
