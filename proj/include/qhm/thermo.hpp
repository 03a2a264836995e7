// thermo.hpp — steady-state heat currents, power, efficiency and regime
// classification from the per-component jump bookkeeping.
//
// Sign convention: J_i > 0 means energy flowing INTO the working fluid
// through channel i; P < 0 means net work extracted. A component with rate
// frequency nu deposits a quantum nu into its bath per jump, so its
// contribution to J_i is -nu * gamma(nu) * Tr[S rho S+].
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "qhm/floquet.hpp"
#include "qhm/kms.hpp"

namespace qhm {

struct RegimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Currents {
  double J1{0.0};
  double J2{0.0};
  double P{0.0}; // P = -J1 - J2 exactly
};

inline Currents currents_and_power(const Liouvillian& L, const Matrix2c& rho) {
  Currents c;
  for (const auto& rc : L.components) {
    if (rc.rate <= 0.0) continue;
    const double flux =
        (rc.op * rho * rc.op.adjoint()).trace().real() * rc.rate;
    const double j = -rc.rate_frequency * flux;
    (rc.channel == 1 ? c.J1 : c.J2) += j;
  }
  c.P = -c.J1 - c.J2;
  return c;
}

// Closed-form weak-driving currents (positive detuning, Omega_r << delta):
//   J1 = delta * q * (e^{-beta_C delta} - e^{-beta_eff omega0}),
//   J2 = -omega0 * q * (...), P = omega_l * q * (...),
// with q = G1 G2 / (G1 + G2). First law J1 + J2 + P = 0 holds identically.
inline Currents analytic_weak_driving(const MachineParams& p, double G1_delta,
                                      double G2_omega0, double beta_eff) {
  if (!(p.delta > 0.0))
    throw InvalidArgumentError("analytic_weak_driving: requires delta > 0");
  if (G1_delta <= 0.0 && G2_omega0 <= 0.0)
    throw InvalidArgumentError("analytic_weak_driving: both rates vanish");
  const double q = G1_delta * G2_omega0 / (G1_delta + G2_omega0);
  const double bracket =
      std::exp(-p.cold.beta * p.delta) - std::exp(-beta_eff * p.omega0);
  Currents c;
  c.J1 = p.delta * q * bracket;
  c.J2 = -p.omega0 * q * bracket;
  c.P = p.omega_l * q * bracket;
  return c;
}

// Work extraction (P < 0) iff omega_l/omega0 < 1 - beta(omega0)/beta_C;
// the boundary itself does not extract.
inline bool extraction_condition(double omega_l, double omega0,
                                 double beta_eff, double beta_C) {
  if (!(omega0 > 0.0))
    throw InvalidArgumentError("extraction_condition: omega0 must be > 0");
  return omega_l / omega0 < 1.0 - beta_eff / beta_C;
}

struct Efficiency {
  double eta{0.0};       // -P / (J2 (1 - lambda0))
  double eta_naive{0.0}; // -P / J2
};

inline Efficiency efficiency(double P, double J2, double lambda0) {
  if (!(P < 0.0))
    throw RegimeError("efficiency: not in engine regime (P >= 0)");
  if (!(J2 > 0.0))
    throw RegimeError("efficiency: channel-2 heat input must be positive");
  if (lambda0 >= 1.0)
    throw RegimeError("efficiency: lambda(omega0) >= 1 with J2 as heat input");
  Efficiency e;
  e.eta_naive = -P / J2;
  e.eta = e.eta_naive / (1.0 - lambda0);
  return e;
}

// Heat drawn from the cold bath: J1 plus the cold fraction of the channel-2
// exchange. (The bath-resolved split of J2 assigns lambda0 * J2 to the cold
// bath; this is the form under which the refrigerator COP saturates Carnot
// exactly at the extraction threshold.)
inline double cooling_power(double J1, double J2, double lambda0) {
  return J1 + lambda0 * J2;
}

// Predicted ultra-strong-coupling power envelope
// E(xi) = e^{-4 xi^2 sum_k ||g_k/omega_k||^2 coth(beta_C omega_k/2)} / xi^2
// up to one global constant.
inline double asymptotic_power_envelope(double xi, const BathSpec& cold) {
  cold.validate();
  if (!(xi > 0.0))
    throw InvalidArgumentError("asymptotic_power_envelope: xi must be > 0");
  double s = 0.0;
  for (const auto& m : cold.modes) {
    const double r = m.coupling / m.frequency;
    s += r * r * thermal_coth(cold.beta, m.frequency);
  }
  return std::exp(-4.0 * xi * xi * s) / (xi * xi);
}

enum class Regime { engine, refrigerator, dissipator };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::engine: return "engine";
    case Regime::refrigerator: return "refrigerator";
    default: return "dissipator";
  }
}

struct ThermoReport {
  double J1{0.0}, J2{0.0}, P{0.0};
  double J_C{std::numeric_limits<double>::quiet_NaN()};
  double beta_eff{std::numeric_limits<double>::quiet_NaN()}; // beta(omega0)
  double lambda{std::numeric_limits<double>::quiet_NaN()};   // lambda(omega0)
  double eta{std::numeric_limits<double>::quiet_NaN()};
  double eta_naive{std::numeric_limits<double>::quiet_NaN()};
  double eta_carnot{std::numeric_limits<double>::quiet_NaN()};
  Regime regime{Regime::dissipator};
};

// Assemble the thermodynamic summary of a working point. `lt` carries the
// frequency-local temperature at omega0 (may be absent if no channel-2 line
// sits near omega0).
inline ThermoReport make_thermo_report(const Currents& c,
                                       const LocalTemperature* lt,
                                       double beta_C, double beta_H) {
  ThermoReport r;
  r.J1 = c.J1;
  r.J2 = c.J2;
  r.P = c.P;
  if (std::isfinite(beta_C) && std::isfinite(beta_H) && beta_C != 0.0)
    r.eta_carnot = 1.0 - beta_H / beta_C;
  if (lt) {
    r.beta_eff = lt->beta_eff;
    r.lambda = lt->lambda;
    if (!lt->degenerate) r.J_C = cooling_power(c.J1, c.J2, lt->lambda);
  }
  if (c.P < 0.0) {
    r.regime = Regime::engine;
    if (lt && !lt->degenerate && c.J2 > 0.0 && lt->lambda < 1.0) {
      const Efficiency e = efficiency(c.P, c.J2, lt->lambda);
      r.eta = e.eta;
      r.eta_naive = e.eta_naive;
    }
  } else if (std::isfinite(r.J_C) && r.J_C > 0.0 && c.P > 0.0) {
    r.regime = Regime::refrigerator;
  } else {
    r.regime = Regime::dissipator;
  }
  return r;
}

} // namespace qhm
