// test_bath.cpp — thermal factors, free correlations, weak-coupling spectra.
#include <catch_amalgamated.hpp>

#include "oracle.hpp"
#include "qhm/bath.hpp"

using namespace qhm;

namespace {
BathSpec one_mode(double w, double g, double xi, double beta,
                  BathLabel label = BathLabel::cold) {
  BathSpec b;
  b.modes = {{w, g}};
  b.xi = xi;
  b.beta = beta;
  b.label = label;
  return b;
}
} // namespace

TEST_CASE("thermal_coth limits and values") {
  CHECK(thermal_coth(kInfiniteBeta, 0.7) == 1.0);
  CHECK_THAT(thermal_coth(2.0, 1.0), Catch::Matchers::WithinRel(
                                         1.0 / std::tanh(1.0), 1e-15));
  CHECK(thermal_coth(1e3, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(thermal_coth(1.0, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(thermal_coth(-1.0, 1.0), InvalidArgumentError);
}

TEST_CASE("bose_occupation limits and values") {
  CHECK(bose_occupation(kInfiniteBeta, 1.0) == 0.0);
  CHECK_THAT(bose_occupation(1.0, 1.0),
             Catch::Matchers::WithinRel(1.0 / (M_E - 1.0), 1e-14));
  // coth = 2 nbar + 1
  const double nbar = bose_occupation(0.8, 1.3);
  CHECK_THAT(thermal_coth(0.8, 1.3),
             Catch::Matchers::WithinRel(2.0 * nbar + 1.0, 1e-13));
}

TEST_CASE("weak_correlation closed form, single mode") {
  const BathSpec b = one_mode(1.5, 0.8, 0.4, 2.0);
  const double g2 = 0.64, x2 = 0.16;
  for (double t : {0.0, 0.3, 1.7, -2.2}) {
    const auto c = weak_correlation(b, t);
    CHECK_THAT(c.real(),
               Catch::Matchers::WithinAbs(
                   x2 * g2 * thermal_coth(2.0, 1.5) * std::cos(1.5 * t),
                   1e-14));
    CHECK_THAT(c.imag(),
               Catch::Matchers::WithinAbs(-x2 * g2 * std::sin(1.5 * t), 1e-14));
  }
}

TEST_CASE("weak_correlation hermiticity and additivity") {
  BathSpec b;
  b.modes = {{0.7, 0.5}, {1.9, 1.1}, {3.2, 0.3}};
  b.xi = 0.6;
  b.beta = 1.4;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> ts(-8.0, 8.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ts(rng);
    const auto c = weak_correlation(b, t);
    const auto cm = weak_correlation(b, -t);
    CHECK(std::abs(cm - std::conj(c)) < 1e-14);
  }
  // additivity over modes
  std::complex<double> sum{0.0, 0.0};
  for (const auto& m : b.modes) {
    BathSpec single = b;
    single.modes = {m};
    sum += weak_correlation(single, 1.234);
  }
  CHECK(std::abs(sum - weak_correlation(b, 1.234)) < 1e-14);
}

TEST_CASE("weak_spectrum line weights and KMS") {
  const double w = 1.2, g = 0.9, xi = 0.5, beta = 1.7;
  const BathSpec b = one_mode(w, g, xi, beta);
  const LineSpectrum s = weak_spectrum(b, 1e-2);
  REQUIRE(s.lines.size() == 2);
  const double nbar = bose_occupation(beta, w);
  CHECK_THAT(s.lines[1].weight, Catch::Matchers::WithinRel(
                                    2.0 * M_PI * xi * xi * g * g * (nbar + 1.0),
                                    1e-14));
  CHECK_THAT(s.lines[0].weight,
             Catch::Matchers::WithinRel(2.0 * M_PI * xi * xi * g * g * nbar,
                                        1e-14));
  // detailed balance between the mirror lines
  CHECK_THAT(s.lines[0].weight,
             Catch::Matchers::WithinRel(s.lines[1].weight * std::exp(-beta * w),
                                        1e-13));
  // sum rule: total = 2 pi C(0)
  CHECK_THAT(s.total_weight(),
             Catch::Matchers::WithinRel(
                 2.0 * M_PI * weak_correlation(b, 0.0).real(), 1e-13));
}

TEST_CASE("weak_spectrum at zero temperature has no absorption lines") {
  const LineSpectrum s = weak_spectrum(one_mode(1.0, 1.0, 0.3, kInfiniteBeta),
                                       1e-2);
  REQUIRE(s.lines.size() == 1);
  CHECK(s.lines[0].frequency == 1.0);
}

TEST_CASE("weak_spectrum sign convention matches the FFT oracle") {
  // e^{-i w t} correlation -> single line at +w with weight 2 pi
  const int n = 1024;
  const double w0 = 2.0 * M_PI * 8 / (n * 0.01); // bin-exact frequency
  std::vector<oracle::cplx> samples(n);
  for (int j = 0; j < n; ++j)
    samples[j] = std::exp(oracle::cplx(0.0, -w0 * j * 0.01));
  const auto lines = oracle::line_weights(samples, 0.01, 1e-9);
  REQUIRE(lines.size() == 1);
  CHECK_THAT(lines[0].frequency, Catch::Matchers::WithinRel(w0, 1e-12));
  CHECK_THAT(lines[0].weight, Catch::Matchers::WithinRel(2.0 * M_PI, 1e-12));

  // weak correlation of a single mode: emission and absorption weights
  const BathSpec b = one_mode(w0, 0.8, 0.5, 1.1);
  for (int j = 0; j < n; ++j) samples[j] = weak_correlation(b, j * 0.01);
  const auto wl = oracle::line_weights(samples, 0.01, 1e-9);
  const LineSpectrum s = weak_spectrum(b, 1e-2);
  for (const auto& ln : s.lines)
    CHECK_THAT(oracle::weight_at(wl, ln.frequency, 1e-9),
               Catch::Matchers::WithinRel(ln.weight, 1e-10));
}

TEST_CASE("weak_coupling_diagnostic") {
  CHECK(weak_coupling_diagnostic(one_mode(1.0, 1.0, 0.0, 1.0), 0.1).gamma_tau ==
        0.0);
  // a single mode never decorrelates
  const auto d = weak_coupling_diagnostic(one_mode(1.0, 1.0, 0.5, 1.0), 0.1);
  CHECK(d.non_decaying);
  CHECK(std::isinf(d.gamma_tau));
}

TEST_CASE("bath validation") {
  BathSpec b;
  CHECK_THROWS_AS(b.validate(), InvalidArgumentError); // no modes
  b = one_mode(1.0, 1.0, 0.5, 1.0);
  b.modes.resize(9, {1.0, 0.1});
  CHECK_THROWS_AS(b.validate(), InvalidArgumentError); // too many modes
  b = one_mode(-1.0, 1.0, 0.5, 1.0);
  CHECK_THROWS_AS(b.validate(), InvalidArgumentError);
  b = one_mode(1.0, 1.0, 0.5, -2.0);
  CHECK_THROWS_AS(b.validate(), InvalidArgumentError);
}
