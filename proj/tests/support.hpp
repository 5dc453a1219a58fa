// Helpers shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "tienet/grid.hpp"

namespace tienet::testing {

inline ScalarField random_scalar(std::size_t m, double a, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarField f(m, a);
  for (auto& v : f.values()) v = u(rng);
  return f;
}

inline ComplexField random_complex(std::size_t m, double a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexField f(m, a);
  for (auto& v : f.values()) v = {u(rng), u(rng)};
  return f;
}

inline double max_abs_diff(const ComplexField& x, const ComplexField& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.count(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

inline double max_abs_diff(const ScalarField& x, const ScalarField& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.count(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

inline double max_abs(const ScalarField& x) {
  double d = 0.0;
  for (double v : x.values()) d = std::max(d, std::abs(v));
  return d;
}

/// Sum of Gaussians exp(-r^2 / 2 s^2) scaled by `amplitude`, centred at
/// offsets (nm) from the field centre pixel (m/2, m/2).
struct Blob {
  double x, y, sigma, amplitude;
};

inline ScalarField gaussian_phase(std::size_t m, double a, std::initializer_list<Blob> blobs) {
  ScalarField f(m, a);
  const double dx = a / static_cast<double>(m);
  const double half = 0.5 * static_cast<double>(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double x = (static_cast<double>(c) - half) * dx;
      const double y = (static_cast<double>(r) - half) * dx;
      double v = 0.0;
      for (const auto& b : blobs) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.amplitude * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
      }
      f(r, c) = v;
    }
  }
  return f;
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tienet-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace tienet::testing
