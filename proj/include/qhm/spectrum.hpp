// spectrum.hpp — discrete line spectra: merging, Lorentzian evaluation,
// and bath-resolved spectral decompositions shared across modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qhm {

// Numerical failure that a sweep should survive point-by-point.
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SpectralLine {
  double frequency{0.0};
  double weight{0.0}; // integrated weight; >= 0 for physical spectra
};

// Sort by frequency and sum weights of lines closer than `tol`.
// Merged frequency is the weight-averaged position (exact for coincident lines).
inline std::vector<SpectralLine> merge_lines(std::vector<SpectralLine> lines,
                                             double tol) {
  if (!(tol >= 0.0)) throw InvalidArgumentError("merge_lines: tol must be >= 0");
  std::sort(lines.begin(), lines.end(),
            [](const SpectralLine& a, const SpectralLine& b) {
              return a.frequency < b.frequency;
            });
  std::vector<SpectralLine> out;
  out.reserve(lines.size());
  for (const auto& ln : lines) {
    if (!out.empty() && ln.frequency - out.back().frequency <= tol) {
      auto& last = out.back();
      const double w = last.weight + ln.weight;
      if (w > 0.0) {
        last.frequency =
            (last.frequency * last.weight + ln.frequency * ln.weight) / w;
      }
      last.weight = w;
    } else {
      out.push_back(ln);
    }
  }
  return out;
}

// A finite set of delta-like lines, each broadened to a normalized Lorentzian
// of half-width `broadening_eta` when evaluated pointwise.
struct LineSpectrum {
  std::vector<SpectralLine> lines; // sorted by frequency
  double broadening_eta{1e-2};

  double total_weight() const {
    double s = 0.0;
    for (const auto& ln : lines) s += ln.weight;
    return s;
  }

  // Largest-weight line with |frequency - omega| <= tol, or nullptr.
  const SpectralLine* find(double omega, double tol) const {
    const SpectralLine* best = nullptr;
    for (const auto& ln : lines) {
      if (std::abs(ln.frequency - omega) <= tol &&
          (!best || ln.weight > best->weight))
        best = &ln;
    }
    return best;
  }
};

inline LineSpectrum make_line_spectrum(std::vector<SpectralLine> lines,
                                       double eta, double merge_tol) {
  if (!(eta > 0.0))
    throw InvalidArgumentError("line spectrum: broadening eta must be > 0");
  LineSpectrum s;
  s.lines = merge_lines(std::move(lines), merge_tol);
  s.broadening_eta = eta;
  return s;
}

// G(omega) = sum_lines w * (eta/pi) / ((omega - f)^2 + eta^2).
inline double evaluate_spectrum(const LineSpectrum& s, double omega) {
  const double eta = s.broadening_eta;
  double g = 0.0;
  for (const auto& ln : s.lines) {
    const double d = omega - ln.frequency;
    g += ln.weight * (eta / M_PI) / (d * d + eta * eta);
  }
  return g;
}

// One additive contribution to a transformed line: a hot-bath quantum
// omega_hot plus a cold-harmonic quantum omega_cold, carrying `weight`.
struct DecompositionTerm {
  double omega_hot{0.0};
  double omega_cold{0.0};
  double weight{0.0};
};

// Bath-resolved bookkeeping attached to a LineSpectrum: for each merged line,
// the (omega_hot, omega_cold) terms that sum to its weight.
struct SpectralDecomposition {
  struct Entry {
    double frequency{0.0};
    std::vector<DecompositionTerm> terms;
    double total() const {
      double s = 0.0;
      for (const auto& t : terms) s += t.weight;
      return s;
    }
  };
  std::vector<Entry> entries; // sorted by frequency

  const Entry* find(double omega, double tol) const {
    const Entry* best = nullptr;
    double bestw = -1.0;
    for (const auto& e : entries) {
      if (std::abs(e.frequency - omega) <= tol) {
        const double w = e.total();
        if (w > bestw) {
          best = &e;
          bestw = w;
        }
      }
    }
    return best;
  }
};

} // namespace qhm
