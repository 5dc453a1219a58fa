#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "support.hpp"
#include "tienet/error.hpp"
#include "tienet/optics.hpp"

using namespace tienet;
using tienet::testing::max_abs_diff;
using tienet::testing::random_complex;

namespace {

// Independent route: lambda = h c / sqrt(E_k (E_k + 2 m0 c^2)), E_k = e V.
double wavelength_oracle(double volts) {
  using namespace physical;
  const double ek = elementary_charge * volts;
  const double mc2 = electron_mass * speed_of_light * speed_of_light;
  return planck * speed_of_light / std::sqrt(ek * (ek + 2.0 * mc2)) * 1e9;
}

double total(const ScalarField& f) {
  return std::accumulate(f.values().begin(), f.values().end(), 0.0);
}

// -(1/k) div(I grad phi) evaluated with spectral derivatives.
ScalarField tie_rhs(const ScalarField& in_focus, const ScalarField& phase, double k) {
  const FrequencyGrid g = frequency_grid(phase.size(), phase.width());
  const ComplexField P = spectral_forward(to_complex(phase));
  ComplexField gx(phase.size(), phase.width()), gy(phase.size(), phase.width());
  const Complex two_pi_i{0.0, 2.0 * std::numbers::pi};
  for (std::size_t i = 0; i < P.count(); ++i) {
    gx[i] = two_pi_i * g.kx[i] * P[i];
    gy[i] = two_pi_i * g.ky[i] * P[i];
  }
  gx = spectral_inverse(gx);
  gy = spectral_inverse(gy);
  for (std::size_t i = 0; i < gx.count(); ++i) {
    gx[i] *= in_focus[i];
    gy[i] *= in_focus[i];
  }
  gx = spectral_forward(gx);
  gy = spectral_forward(gy);
  ComplexField div(phase.size(), phase.width());
  for (std::size_t i = 0; i < div.count(); ++i) {
    div[i] = two_pi_i * (g.kx[i] * gx[i] + g.ky[i] * gy[i]);
  }
  const ScalarField d = real_part(spectral_inverse(div));
  ScalarField out(phase.size(), phase.width());
  for (std::size_t i = 0; i < out.count(); ++i) out[i] = -d[i] / k;
  return out;
}

double relative_l2(const ScalarField& x, const ScalarField& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.count(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("electron wavelength") {
  CHECK(electron_wavelength(3e5) == doctest::Approx(1.9687e-3).epsilon(1e-4));
  CHECK(electron_wavelength(1e5) == doctest::Approx(3.7014e-3).epsilon(1e-4));
  for (double v : {5e4, 1e5, 2e5, 3e5, 1e6}) {
    CHECK(electron_wavelength(v) == doctest::Approx(wavelength_oracle(v)).epsilon(1e-12));
  }
  double prev = electron_wavelength(1e3);
  for (double v = 2e3; v <= 2e6; v *= 1.5) {
    const double now = electron_wavelength(v);
    CHECK(now < prev);
    prev = now;
  }
  CHECK_THROWS_AS(electron_wavelength(0.0), Error);
  CHECK_THROWS_AS(electron_wavelength(-1.0), Error);
}

TEST_CASE("interaction constant") {
  CHECK(interaction_constant(3e5) == doctest::Approx(6.526e-3).epsilon(1e-3));
  using namespace physical;
  const double e0 = electron_mass * speed_of_light * speed_of_light / elementary_charge;
  for (double v : {5e4, 1e5, 3e5, 1e6}) {
    const double lhs = interaction_constant(v) * electron_wavelength(v) * v / (2.0 * std::numbers::pi);
    CHECK(lhs == doctest::Approx((e0 + v) / (2.0 * e0 + v)).epsilon(1e-14));
  }
  double prev = interaction_constant(5e4);
  for (double v = 6e4; v <= 1e6; v += 1e4) {
    const double now = interaction_constant(v);
    CHECK(now < prev);
    prev = now;
  }
  CHECK_THROWS_AS(interaction_constant(0.0), Error);
}

TEST_CASE("optics config derives consistent constants") {
  const auto c = OpticsConfig::make(3e5, 8e3, 0.15);
  CHECK(c.wavenumber * c.wavelength == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-15));
  CHECK(c.interaction == interaction_constant(3e5));
  CHECK(c.potential == Complex{-17.0, 1.0});
  CHECK_THROWS_AS(OpticsConfig::make(3e5, 0.0, 0.1), Error);
  CHECK_THROWS_AS(OpticsConfig::make(3e5, 8e3, 1.0), Error);
  CHECK_THROWS_AS(OpticsConfig::make(3e5, 8e3, -0.1), Error);
}

TEST_CASE("free-space propagation") {
  const double lambda = electron_wavelength(3e5);
  const ComplexField psi = random_complex(32, 150.0, 11);

  SUBCASE("zero distance is the identity") {
    CHECK(max_abs_diff(propagate(psi, 0.0, lambda), psi) < 1e-12);
  }
  SUBCASE("plane waves are unchanged") {
    const ComplexField flat(32, 150.0, Complex{0.6, -0.2});
    CHECK(max_abs_diff(propagate(flat, 5e4, lambda), flat) < 1e-14);
  }
  SUBCASE("propagation composes") {
    const ComplexField two_steps = propagate(propagate(psi, 3e3, lambda), -7e3, lambda);
    const ComplexField one_step = propagate(psi, -4e3, lambda);
    double norm = 0.0;
    for (const auto& v : one_step.values()) norm = std::max(norm, std::abs(v));
    CHECK(max_abs_diff(two_steps, one_step) / norm < 1e-10);
  }
  SUBCASE("total intensity is conserved") {
    const double e0 = total(intensity(psi));
    for (double z : {-8e4, -1e3, 10.0, 8e3, 8e4}) {
      CHECK(std::abs(total(intensity(propagate(psi, z, lambda))) - e0) / e0 < 1e-10);
    }
  }
}

TEST_CASE("defocus series") {
  const double lambda = electron_wavelength(3e5);
  SUBCASE("vacuum stays uniform") {
    const ComplexField vacuum(32, 150.0, Complex{1.0, 0.0});
    const auto s = defocus_series(vacuum, 8e3, lambda);
    for (const auto* img : {&s.under, &s.in_focus, &s.over}) {
      for (double v : img->values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("pure phase object at vanishing defocus") {
    const ScalarField phase = tienet::testing::gaussian_phase(64, 150.0, {{0, 0, 10.0, -2.0}});
    ComplexField psi(64, 150.0);
    for (std::size_t i = 0; i < psi.count(); ++i) psi[i] = std::polar(1.0, phase[i]);
    const auto s = defocus_series(psi, 1e-3, lambda);
    for (std::size_t i = 0; i < psi.count(); ++i) {
      CHECK(s.under[i] == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(s.over[i] == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("energy is equal across the three planes and images are non-negative") {
    const ComplexField psi = random_complex(32, 150.0, 5);
    const auto s = defocus_series(psi, 8e4, lambda);
    const double e0 = total(s.in_focus);
    CHECK(std::abs(total(s.under) - e0) / e0 < 1e-10);
    CHECK(std::abs(total(s.over) - e0) / e0 < 1e-10);
    for (const auto* img : {&s.under, &s.in_focus, &s.over}) {
      for (double v : img->values()) CHECK(v >= 0.0);
    }
  }
  CHECK_THROWS_AS(defocus_series(ComplexField(8, 1.0), 0.0, lambda), Error);
}

TEST_CASE("finite-difference derivative obeys the transport-of-intensity equation") {
  // Gaussian phase dip with weak absorption; the right-hand side uses spectral
  // derivatives so only the finite-difference truncation error remains.
  const auto optics = OpticsConfig::make(3e5, 1e3, 0.0);
  const std::size_t m = 128;
  const double a = 150.0;
  const ScalarField phase = tienet::testing::gaussian_phase(m, a, {{0, 0, a / 16.0, -1.0}});
  const ScalarField absorb = tienet::testing::gaussian_phase(m, a, {{0, 0, a / 16.0, 0.05}});
  ComplexField psi(m, a);
  for (std::size_t i = 0; i < psi.count(); ++i) psi[i] = std::polar(std::exp(-absorb[i]), phase[i]);
  const ScalarField rhs = tie_rhs(intensity(psi), phase, optics.wavenumber);

  auto residual = [&](double df) {
    const auto s = defocus_series(psi, df, optics.wavelength);
    ScalarField d(m, a);
    for (std::size_t i = 0; i < d.count(); ++i) d[i] = (s.over[i] - s.under[i]) / (2.0 * df);
    return relative_l2(d, rhs);
  };
  const double r1 = residual(1e3);
  const double r2 = residual(2e3);
  MESSAGE("TIE residual at 1 um: " << r1 << ", at 2 um: " << r2 << ", ratio " << r2 / r1);
  CHECK(r1 < 0.05);
  CHECK(r2 / r1 >= 3.5);
  CHECK(r2 / r1 <= 4.5);

  // A phase minimum has a positive Laplacian, so its centre darkens on over-focus.
  const auto s = defocus_series(psi, 8e3, optics.wavelength);
  const std::size_t centre = (m / 2) * m + m / 2;
  CHECK(s.over[centre] < s.under[centre]);
}

TEST_CASE("shot noise") {
  const ScalarField clean(512, 150.0, 1.0);

  CHECK(add_shot_noise(clean, 0.0, 1.0, 1) == clean);

  const ScalarField noisy = add_shot_noise(clean, 0.15, 1.0, 42);
  const double n = static_cast<double>(noisy.count());
  const double mean = total(noisy) / n;
  double var = 0.0;
  for (double v : noisy.values()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  CHECK(sd == doctest::Approx(0.15).epsilon(0.005 / 0.15));
  CHECK(std::abs(mean - 1.0) < 3.0 * sd / std::sqrt(n));

  CHECK(add_shot_noise(clean, 0.15, 1.0, 42) == noisy);
  CHECK_FALSE(add_shot_noise(clean, 0.15, 1.0, 43) == noisy);

  // Quantised to multiples of I_in / nbar.
  const double quantum = 0.15 * 0.15;
  for (std::size_t i = 0; i < 100; ++i) {
    const double counts = noisy[i] / quantum;
    CHECK(counts == doctest::Approx(std::round(counts)).epsilon(1e-9));
  }

  ScalarField negative(8, 1.0, 1.0);
  negative[3] = -0.1;
  CHECK_THROWS_AS(add_shot_noise(negative, 0.15, 1.0, 1), Error);
  CHECK_THROWS_AS(add_shot_noise(clean, 1.0, 1.0, 1), Error);
}
