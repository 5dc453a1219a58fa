#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "support.hpp"
#include "tienet/error.hpp"
#include "tienet/field_io.hpp"
#include "tienet/grid.hpp"

using namespace tienet;
using tienet::testing::max_abs_diff;
using tienet::testing::random_complex;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tienet::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("grid sizes must be powers of two no smaller than 8") {
  CHECK_NOTHROW(check_grid_size(8));
  CHECK_NOTHROW(check_grid_size(128));
  CHECK(code_of([] { check_grid_size(4); }) == ErrorCode::InvalidSize);
  CHECK(code_of([] { check_grid_size(12); }) == ErrorCode::InvalidSize);
  CHECK(code_of([] { ScalarField f(24, 1.0); }) == ErrorCode::InvalidSize);
  CHECK(code_of([] { spectral_forward(ComplexField()); }) == ErrorCode::InvalidSize);
}

TEST_CASE("constant field transforms to a DC-only spectrum") {
  const double c = 0.75;
  const std::size_t m = 16;
  const ComplexField f(m, 10.0, Complex{c, 0.0});
  const ComplexField F = spectral_forward(f);
  // Unitary normalisation: DC holds c * m.
  CHECK(std::abs(F[0] - Complex{c * m, 0.0}) < 1e-12);
  for (std::size_t i = 1; i < F.count(); ++i) CHECK(std::abs(F[i]) < 1e-12);
}

TEST_CASE("single cosine occupies exactly the +-1 cycle bins") {
  const std::size_t m = 32;
  ComplexField f(m, 50.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      f(r, c) = std::cos(2.0 * std::numbers::pi * static_cast<double>(c) / m);
    }
  }
  const ComplexField F = spectral_forward(f);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const bool peak = r == 0 && (c == 1 || c == m - 1);
      if (peak) {
        CHECK(std::abs(F(r, c) - Complex{m / 2.0, 0.0}) < 1e-12);
      } else {
        CHECK(std::abs(F(r, c)) < 1e-12);
      }
    }
  }
}

TEST_CASE("round trip, Parseval and Hermitian symmetry") {
  const ComplexField f = random_complex(32, 20.0, 7);
  const ComplexField F = spectral_forward(f);
  CHECK(max_abs_diff(spectral_inverse(F), f) < 1e-12);

  double ef = 0.0, eF = 0.0;
  for (std::size_t i = 0; i < f.count(); ++i) {
    ef += std::norm(f[i]);
    eF += std::norm(F[i]);
  }
  CHECK(std::abs(ef - eF) / ef < 1e-12);

  const ScalarField real = tienet::testing::random_scalar(32, 20.0, 8);
  const ComplexField R = spectral_forward(to_complex(real));
  const std::size_t m = 32;
  double worst = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const Complex mirror = R((m - r) % m, (m - c) % m);
      worst = std::max(worst, std::abs(R(r, c) - std::conj(mirror)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("frequency grid layout") {
  SUBCASE("m=8, a=8 nm") {
    const FrequencyGrid g = frequency_grid(8, 8.0);
    const double expected[] = {0, 0.125, 0.25, 0.375, 0.5, -0.375, -0.25, -0.125};
    for (std::size_t c = 0; c < 8; ++c) CHECK(g.kx[c] == doctest::Approx(expected[c]));
    // ky is constant along a row and follows the same sequence down the rows.
    for (std::size_t r = 0; r < 8; ++r) CHECK(g.ky[r * 8 + 3] == doctest::Approx(expected[r]));
  }
  SUBCASE("DC at index 0 and antisymmetry away from Nyquist") {
    for (std::size_t m : {8u, 32u, 128u}) {
      const FrequencyGrid g = frequency_grid(m, 37.0);
      CHECK(g.kx[0] == 0.0);
      CHECK(g.ky[0] == 0.0);
      for (std::size_t j = 1; j < m; ++j) {
        if (j == m / 2) {
          CHECK(std::abs(g.kx[j]) == doctest::Approx(0.5 * m / 37.0));
          continue;
        }
        CHECK(g.kx[m - j] == -g.kx[j]);
        CHECK(g.ky[(m - j) * m] == -g.ky[j * m]);
      }
      for (std::size_t i = 0; i < m * m; ++i) {
        CHECK(g.ksq[i] == doctest::Approx(g.kx[i] * g.kx[i] + g.ky[i] * g.ky[i]));
      }
    }
  }
  SUBCASE("frequency step for the 128 px, 150 nm grid") {
    const FrequencyGrid g = frequency_grid(128, 150.0);
    CHECK(g.step() == doctest::Approx(1.0 / 150.0));
    CHECK(g.kx[1] == doctest::Approx(1.0 / 150.0));
  }
}

TEST_CASE("disk mask") {
  SUBCASE("m=128, radius 0.5a") {
    const DiskMask mask = disk_mask(128, 0.5);
    // Frozen from a direct integer rasterisation of (r-64)^2 + (c-64)^2 <= 64^2.
    CHECK(mask.true_count() == 12851);
    const double area = std::numbers::pi * 64.0 * 64.0;
    CHECK(std::abs(static_cast<double>(mask.true_count()) - area) / area < 0.02);
    CHECK_FALSE(mask[0]);
    CHECK_FALSE(mask[127]);
    CHECK_FALSE(mask[127 * 128]);
    CHECK_FALSE(mask[128 * 128 - 1]);
  }
  SUBCASE("count tracks pi r^2 for other sizes") {
    for (std::size_t m : {64u, 256u}) {
      for (double frac : {0.2, 0.45, 0.5, 0.7}) {
        const DiskMask mask = disk_mask(m, frac);
        const double area = std::numbers::pi * frac * frac * m * m;
        const double expected = std::min(area, static_cast<double>(m * m));
        if (frac < 0.5 + 1e-9) {
          CHECK(std::abs(mask.true_count() - expected) / expected < 0.02);
        }
      }
    }
  }
  SUBCASE("vanishing radius keeps only the centre pixel") {
    const DiskMask mask = disk_mask(32, 1e-6);
    CHECK(mask.true_count() == 1);
    CHECK(mask[16 * 32 + 16]);
  }
  SUBCASE("radius out of range") {
    CHECK(code_of([] { disk_mask(32, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { disk_mask(32, -0.1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { disk_mask(32, 0.75); }) == ErrorCode::InvalidArgument);
    CHECK_NOTHROW(disk_mask(32, 0.5 * std::numbers::sqrt2));
  }
}

TEST_CASE("window weights") {
  const auto hard = window_weights(64, 0.5, WindowShape::Hard);
  const DiskMask mask = disk_mask(64, 0.5);
  for (std::size_t i = 0; i < hard.size(); ++i) CHECK(hard[i] == (mask[i] ? 1.0 : 0.0));

  const auto soft = window_weights(64, 0.5, WindowShape::RaisedCosine, 0.2);
  CHECK(soft[32 * 64 + 32] == 1.0);
  for (std::size_t i = 0; i < soft.size(); ++i) {
    CHECK(soft[i] >= 0.0);
    CHECK(soft[i] <= 1.0);
    if (!mask[i]) CHECK(soft[i] == 0.0);
  }
}

TEST_CASE("PHF1 layout and round trip") {
  ScalarField f = tienet::testing::random_scalar(8, 12.5, 3);
  const auto bytes = encode_phf1(f);
  REQUIRE(bytes.size() == 4 + 4 + 8 + 1 + 8 * 64);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PHF1");
  CHECK(bytes[4] == 8);
  CHECK(bytes[5] == 0);
  double a = 0.0;
  std::memcpy(&a, bytes.data() + 8, 8);
  CHECK(a == 12.5);
  CHECK(bytes[16] == 0);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 17, 8);
  CHECK(first == f[0]);

  const auto back = std::get<ScalarField>(decode_phf1(bytes));
  CHECK(back == f);
  CHECK(encode_phf1(back) == bytes);

  const ComplexField z = random_complex(16, 3.0, 4);
  const auto zbytes = encode_phf1(z);
  CHECK(zbytes[16] == 1);
  CHECK(std::get<ComplexField>(decode_phf1(zbytes)) == z);

  SUBCASE("malformed payloads") {
    auto truncated = bytes;
    truncated.pop_back();
    CHECK(code_of([&] { decode_phf1(truncated); }) == ErrorCode::Format);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { decode_phf1(bad_magic); }) == ErrorCode::Format);
    auto bad_kind = bytes;
    bad_kind[16] = 7;
    CHECK(code_of([&] { decode_phf1(bad_kind); }) == ErrorCode::Format);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(code_of([&] { decode_phf1(trailing); }) == ErrorCode::Format);
  }

  SUBCASE("files") {
    tienet::testing::TempDir dir("grid");
    write_field(dir / "f.phf", f);
    CHECK(read_bytes(dir / "f.phf") == bytes);
    CHECK(read_scalar_field(dir / "f.phf") == f);
    write_field(dir / "z.phf", z);
    CHECK(code_of([&] { read_scalar_field(dir / "z.phf"); }) == ErrorCode::Format);
    CHECK(code_of([&] { read_field(dir / "missing.phf"); }) == ErrorCode::Io);
  }
}
