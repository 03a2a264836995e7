// floquet.hpp — dressed-basis Floquet decomposition of the two jump channels
// and the resulting Lindblad generator / steady state for the driven TLS.
//
// Rotating frame at the drive frequency omega_l:
//   H_bar = (delta/2) sigma_z + (Omega_r/2) sigma_x,  delta = omega0 - omega_l,
// with Omega_r = Omega * A the polaron-renormalized Rabi frequency.
// Channel 1 couples through sigma_x to the dressed drive correlation (G1,
// photon index q = 0); channel 2 couples through sigma_+/- to the dressed
// hot-bath correlation (G2, q = -/+ 1). Each channel operator is split into
// its lowering / raising / diagonal parts in the dressed eigenbasis
// (harmonics +Omega', -Omega', 0 with Omega' = sqrt(delta^2 + Omega_r^2));
// a component's rate is the channel spectrum at omega + q*omega_l.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qhm/bath.hpp"
#include "qhm/polaron.hpp"
#include "qhm/spectrum.hpp"

namespace qhm {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

namespace pauli {
inline Matrix2c sx() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix2c sz() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}
inline Matrix2c sp() { // |e><g|
  Matrix2c m;
  m << 0, 1, 0, 0;
  return m;
}
inline Matrix2c sm() { return sp().adjoint(); }
} // namespace pauli

struct MachineParams {
  double omega0{1.0};  // bare TLS gap
  double omega_l{0.0}; // drive frequency
  double Omega{0.0};   // bare Rabi frequency
  BathSpec cold;
  BathSpec hot;
  // derived
  double delta{0.0};         // omega0 - omega_l
  double franck_condon{1.0}; // A
  double omega_r{0.0};       // Omega * A
  bool weak_driving{false};  // Omega_r / |delta| <= 0.05
};

inline MachineParams make_machine(double omega0, double omega_l, double Omega,
                                  BathSpec cold, BathSpec hot) {
  if (!(omega0 > 0.0))
    throw InvalidArgumentError("machine: omega0 must be > 0");
  if (!(omega_l >= 0.0))
    throw InvalidArgumentError("machine: omega_l must be >= 0");
  if (!(Omega >= 0.0))
    throw InvalidArgumentError("machine: Omega must be >= 0");
  cold.validate();
  hot.validate();
  MachineParams p;
  p.omega0 = omega0;
  p.omega_l = omega_l;
  p.Omega = Omega;
  p.cold = std::move(cold);
  p.hot = std::move(hot);
  p.cold.label = BathLabel::cold;
  p.hot.label = BathLabel::hot;
  p.delta = omega0 - omega_l;
  p.franck_condon = franck_condon(p.cold);
  p.omega_r = renormalized_rabi(Omega, p.franck_condon);
  p.weak_driving =
      p.delta != 0.0 && p.omega_r / std::abs(p.delta) <= 0.05;
  return p;
}

struct DressedBasis {
  double omega_prime{0.0}; // dressed splitting
  double theta{0.0};       // mixing angle, tan(theta) = Omega_r / delta
  Matrix2c eigvecs;        // columns: |+>, |-> in the bare {|e>, |g>} basis
};

inline DressedBasis dressed_basis(const MachineParams& p) {
  DressedBasis b;
  b.omega_prime = std::hypot(p.delta, p.omega_r);
  b.theta = std::atan2(p.omega_r, p.delta);
  const double c = std::cos(0.5 * b.theta), s = std::sin(0.5 * b.theta);
  b.eigvecs << c, -s, s, c;
  return b;
}

struct HarmonicComponent {
  int channel{1};              // 1 = drive/cold, 2 = hot
  int q{0};                    // photon index
  double omega{0.0};           // dressed-frame harmonic (+Omega', -Omega', 0)
  double rate_frequency{0.0};  // omega + q * omega_l
  Matrix2c op;                 // component operator in the bare basis
};

namespace detail {

// Split X into its dressed lowering (+Omega'), raising (-Omega') and
// diagonal (0) parts; completeness (sum = X) holds by construction.
inline void split_dressed(const Matrix2c& X, const DressedBasis& b, int channel,
                          int q, double omega_l,
                          std::vector<HarmonicComponent>& out) {
  const Matrix2c& V = b.eigvecs;
  const Matrix2c Xd = V.adjoint() * X * V;
  const auto emit = [&](const Matrix2c& Md, double omega) {
    if (Md.cwiseAbs().maxCoeff() < 1e-14) return;
    HarmonicComponent c;
    c.channel = channel;
    c.q = q;
    c.omega = omega;
    c.rate_frequency = omega + q * omega_l;
    c.op = V * Md * V.adjoint();
    out.push_back(c);
  };
  Matrix2c low = Matrix2c::Zero(), raise = Matrix2c::Zero(),
           diag = Matrix2c::Zero();
  low(1, 0) = Xd(1, 0);   // |-><+| : emits Omega'
  raise(0, 1) = Xd(0, 1); // |+><-| : absorbs Omega'
  diag(0, 0) = Xd(0, 0);
  diag(1, 1) = Xd(1, 1);
  emit(low, +b.omega_prime);
  emit(raise, -b.omega_prime);
  emit(diag, 0.0);
}

// 4x4 Kronecker product for the vectorized (column-major) superoperators.
inline Matrix4c kron(const Matrix2c& A, const Matrix2c& B) {
  Matrix4c K;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      K.block<2, 2>(2 * i, 2 * j) = A(i, j) * B;
  return K;
}

// vec(AXB) = (B^T kron A) vec(X) with column-major vec.
inline Matrix4c dissipator_matrix(const Matrix2c& S) {
  const Matrix2c SdS = S.adjoint() * S;
  return kron(S.conjugate(), S) -
         0.5 * kron(Matrix2c::Identity(), SdS) -
         0.5 * kron(SdS.transpose(), Matrix2c::Identity());
}

} // namespace detail

inline std::vector<HarmonicComponent> fourier_decompose(
    const MachineParams& p, const DressedBasis& b) {
  std::vector<HarmonicComponent> out;
  if (p.Omega != 0.0)
    detail::split_dressed(pauli::sx(), b, /*channel=*/1, /*q=*/0, p.omega_l,
                          out);
  detail::split_dressed(pauli::sp(), b, /*channel=*/2, /*q=*/-1, p.omega_l,
                        out);
  detail::split_dressed(pauli::sm(), b, /*channel=*/2, /*q=*/+1, p.omega_l,
                        out);
  return out;
}

struct RateComponent {
  int channel{1};
  double rate_frequency{0.0};
  double rate{0.0}; // G_channel(rate_frequency) >= 0
  Matrix2c op;
};

struct Liouvillian {
  Matrix4c matrix = Matrix4c::Zero();
  std::vector<RateComponent> components; // grouped, rates attached
  bool all_rates_zero{true};
};

// Group components with equal (channel, rate frequency) within group_tol
// (secular grouping), attach the channel spectrum evaluated at the rate
// frequency, and assemble the vectorized generator.
inline Liouvillian build_liouvillian(
    const std::vector<HarmonicComponent>& components, const LineSpectrum& G1,
    const LineSpectrum& G2, double group_tol) {
  Liouvillian L;
  for (const auto& c : components) {
    RateComponent* slot = nullptr;
    for (auto& rc : L.components) {
      if (rc.channel == c.channel &&
          std::abs(rc.rate_frequency - c.rate_frequency) <= group_tol) {
        slot = &rc;
        break;
      }
    }
    if (slot) {
      slot->op += c.op;
    } else {
      RateComponent rc;
      rc.channel = c.channel;
      rc.rate_frequency = c.rate_frequency;
      rc.op = c.op;
      L.components.push_back(rc);
    }
  }
  for (auto& rc : L.components) {
    const LineSpectrum& G = rc.channel == 1 ? G1 : G2;
    rc.rate = evaluate_spectrum(G, rc.rate_frequency);
    if (rc.rate > 0.0) {
      L.matrix += rc.rate * detail::dissipator_matrix(rc.op);
      L.all_rates_zero = false;
    }
  }
  return L;
}

struct SteadyState {
  Matrix2c rho;
  double residual{0.0};       // ||L vec(rho)|| / ||L||
  double trace_error{0.0};    // |Tr(rho) - 1|
  double min_eigenvalue{0.0}; // smallest eigenvalue of rho
};

struct NoSteadyStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonUniqueSteadyStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unique kernel element of L with unit trace. The kernel dimension is
// checked via SVD against rank_tol before solving.
inline SteadyState steady_state(const Liouvillian& L, double rank_tol) {
  const double scale = L.matrix.cwiseAbs().maxCoeff();
  if (L.all_rates_zero || scale == 0.0)
    throw NoSteadyStateError("steady_state: generator vanishes");

  Eigen::JacobiSVD<Matrix4c> svd(L.matrix);
  const auto& sv = svd.singularValues();
  int null_dim = 0;
  for (int i = 0; i < 4; ++i)
    if (sv(i) < rank_tol * sv(0)) ++null_dim;
  if (null_dim == 0)
    throw NoSteadyStateError("steady_state: generator has trivial kernel");
  if (null_dim > 1)
    throw NonUniqueSteadyStateError(
        "steady_state: degenerate kernel (dimension " +
        std::to_string(null_dim) + ")");

  // stack the trace constraint on top of L and least-squares solve
  Eigen::Matrix<std::complex<double>, 5, 4> M;
  M.topRows<4>() = L.matrix / scale;
  M.row(4) << 1.0, 0.0, 0.0, 1.0; // Tr(rho) = 1, column-major vec
  Eigen::Matrix<std::complex<double>, 5, 1> rhs;
  rhs << 0.0, 0.0, 0.0, 0.0, 1.0;
  const Vector4c x = M.colPivHouseholderQr().solve(rhs);

  SteadyState ss;
  ss.rho = Eigen::Map<const Matrix2c>(x.data()); // column-major
  ss.rho = 0.5 * (ss.rho + ss.rho.adjoint().eval()); // enforce hermiticity
  const Vector4c v = Eigen::Map<const Vector4c>(ss.rho.data());
  ss.residual = (L.matrix * v).norm() / scale;
  ss.trace_error = std::abs(ss.rho.trace().real() - 1.0) +
                   std::abs(ss.rho.trace().imag());
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(ss.rho);
  ss.min_eigenvalue = es.eigenvalues().minCoeff();
  return ss;
}

} // namespace qhm
