#include "tienet/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "tienet/error.hpp"

namespace tienet {

void check_grid_size(std::size_t m) {
  if (m < 8 || !std::has_single_bit(m)) {
    throw Error(ErrorCode::InvalidSize,
                "grid size must be a power of two >= 8, got " + std::to_string(m));
  }
}

template <typename T>
Field<T>::Field(std::size_t m, double width_nm, T fill) : m_(m), a_(width_nm) {
  check_grid_size(m);
  if (!(width_nm > 0.0) || !std::isfinite(width_nm)) {
    throw Error(ErrorCode::InvalidArgument, "field width must be positive and finite");
  }
  data_.assign(m * m, fill);
}

template <typename T>
Field<T>::Field(std::size_t m, double width_nm, std::vector<T> data)
    : m_(m), a_(width_nm), data_(std::move(data)) {
  check_grid_size(m);
  if (!(width_nm > 0.0) || !std::isfinite(width_nm)) {
    throw Error(ErrorCode::InvalidArgument, "field width must be positive and finite");
  }
  if (data_.size() != m * m) {
    throw Error(ErrorCode::InvalidSize, "field data length does not equal m*m");
  }
}

template class Field<double>;
template class Field<Complex>;

template <typename T, typename U>
void require_same_shape(const Field<T>& lhs, const Field<U>& rhs, const char* what) {
  if (lhs.size() != rhs.size() || lhs.width() != rhs.width()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": field shapes differ");
  }
}

template void require_same_shape(const ScalarField&, const ScalarField&, const char*);
template void require_same_shape(const ComplexField&, const ComplexField&, const char*);
template void require_same_shape(const ScalarField&, const ComplexField&, const char*);
template void require_same_shape(const ComplexField&, const ScalarField&, const char*);

void require_finite(const ScalarField& f, const char* what) {
  for (double v : f.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + ": non-finite sample");
  }
}

void require_finite(const ComplexField& f, const char* what) {
  for (const Complex& v : f.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::NonFinite, std::string(what) + ": non-finite sample");
    }
  }
}

ComplexField to_complex(const ScalarField& f) {
  ComplexField out(f.size(), f.width());
  for (std::size_t i = 0; i < f.count(); ++i) out[i] = f[i];
  return out;
}

ScalarField real_part(const ComplexField& f) {
  ScalarField out(f.size(), f.width());
  for (std::size_t i = 0; i < f.count(); ++i) out[i] = f[i].real();
  return out;
}

ScalarField intensity(const ComplexField& f) {
  ScalarField out(f.size(), f.width());
  for (std::size_t i = 0; i < f.count(); ++i) out[i] = std::norm(f[i]);
  return out;
}

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (size, direction) under a lock.
class PlanCache {
 public:
  fftw_plan get(std::size_t m, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(m, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int n = static_cast<int>(m);
    auto* buf = fftw_alloc_complex(m * m);
    fftw_plan plan = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

ComplexField transform(const ComplexField& f, int sign) {
  check_grid_size(f.size());
  ComplexField out = f;
  auto* data = reinterpret_cast<fftw_complex*>(out.values().data());
  fftw_execute_dft(plan_cache().get(f.size(), sign), data, data);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& v : out.values()) v *= scale;
  return out;
}

}  // namespace

ComplexField spectral_forward(const ComplexField& f) { return transform(f, FFTW_FORWARD); }

ComplexField spectral_inverse(const ComplexField& spectrum) {
  return transform(spectrum, FFTW_BACKWARD);
}

double FrequencyGrid::axis_frequency(std::size_t j, std::size_t m, double width) {
  const auto sj = static_cast<double>(j);
  const auto sm = static_cast<double>(m);
  return (j <= m / 2 ? sj : sj - sm) / width;
}

FrequencyGrid frequency_grid(std::size_t m, double width_nm) {
  check_grid_size(m);
  if (!(width_nm > 0.0)) throw Error(ErrorCode::InvalidArgument, "width must be positive");
  FrequencyGrid g;
  g.m = m;
  g.width = width_nm;
  g.kx.resize(m * m);
  g.ky.resize(m * m);
  g.ksq.resize(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    const double fy = FrequencyGrid::axis_frequency(r, m, width_nm);
    for (std::size_t c = 0; c < m; ++c) {
      const double fx = FrequencyGrid::axis_frequency(c, m, width_nm);
      const std::size_t i = r * m + c;
      g.kx[i] = fx;
      g.ky[i] = fy;
      g.ksq[i] = fx * fx + fy * fy;
    }
  }
  return g;
}

std::size_t DiskMask::true_count() const {
  std::size_t n = 0;
  for (auto v : inside) n += v;
  return n;
}

namespace {

void check_radius_fraction(double radius_fraction) {
  if (!(radius_fraction > 0.0) || radius_fraction > 0.5 * std::numbers::sqrt2) {
    throw Error(ErrorCode::InvalidArgument, "radius fraction must lie in (0, sqrt(2)/2]");
  }
}

// Distance of pixel (r, c) from the field centre (pixel m/2, m/2), in units
// of the field width.
double radial_fraction(std::size_t r, std::size_t c, std::size_t m) {
  const double centre = 0.5 * static_cast<double>(m);
  const double dy = (static_cast<double>(r) - centre) / static_cast<double>(m);
  const double dx = (static_cast<double>(c) - centre) / static_cast<double>(m);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

DiskMask disk_mask(std::size_t m, double radius_fraction) {
  check_grid_size(m);
  check_radius_fraction(radius_fraction);
  DiskMask mask;
  mask.m = m;
  mask.radius_fraction = radius_fraction;
  mask.inside.resize(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      mask.inside[r * m + c] = radial_fraction(r, c, m) <= radius_fraction ? 1 : 0;
    }
  }
  return mask;
}

std::vector<double> window_weights(std::size_t m, double radius_fraction, WindowShape shape,
                                   double taper_fraction) {
  check_grid_size(m);
  check_radius_fraction(radius_fraction);
  std::vector<double> w(m * m, 0.0);
  const double inner = radius_fraction * (1.0 - taper_fraction);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double rho = radial_fraction(r, c, m);
      double v = 0.0;
      if (shape == WindowShape::Hard || taper_fraction <= 0.0) {
        v = rho <= radius_fraction ? 1.0 : 0.0;
      } else if (rho <= inner) {
        v = 1.0;
      } else if (rho <= radius_fraction) {
        const double t = (rho - inner) / (radius_fraction - inner);
        v = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
      }
      w[r * m + c] = v;
    }
  }
  return w;
}

ScalarField apply_window(const ScalarField& f, std::span<const double> weights) {
  if (weights.size() != f.count()) {
    throw Error(ErrorCode::ShapeMismatch, "window size does not match field");
  }
  ScalarField out = f;
  for (std::size_t i = 0; i < f.count(); ++i) out[i] *= weights[i];
  return out;
}

}  // namespace tienet
