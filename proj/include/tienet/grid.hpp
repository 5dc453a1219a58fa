#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tienet {

using Complex = std::complex<double>;

/// Checks m >= 8 and m a power of two; throws ErrorCode::InvalidSize otherwise.
void check_grid_size(std::size_t m);

/// Square m x m grid of samples covering a physical width `a` (nm).
/// Storage is row-major with row = y, column = x.
template <typename T>
class Field {
 public:
  Field() = default;
  Field(std::size_t m, double width_nm, T fill = T{});
  Field(std::size_t m, double width_nm, std::vector<T> data);

  std::size_t size() const noexcept { return m_; }
  double width() const noexcept { return a_; }
  double pixel_size() const noexcept { return a_ / static_cast<double>(m_); }
  std::size_t count() const noexcept { return data_.size(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * m_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * m_ + col]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_shape(const Field& other) const noexcept {
    return m_ == other.m_ && a_ == other.a_;
  }

  bool operator==(const Field&) const = default;

 private:
  std::size_t m_ = 0;
  double a_ = 0.0;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using ComplexField = Field<Complex>;

/// Throws ShapeMismatch unless both fields share m and width.
template <typename T, typename U>
void require_same_shape(const Field<T>& lhs, const Field<U>& rhs, const char* what);

/// Throws NonFinite if any sample is NaN or infinite.
void require_finite(const ScalarField& f, const char* what);
void require_finite(const ComplexField& f, const char* what);

ComplexField to_complex(const ScalarField& f);
ScalarField real_part(const ComplexField& f);
ScalarField intensity(const ComplexField& f);

// Unitary 2D DFT pair: both directions carry a 1/m scale, so Parseval holds
// without extra factors and the round trip is the identity. A constant field
// c maps to c*m at DC.
ComplexField spectral_forward(const ComplexField& f);
ComplexField spectral_inverse(const ComplexField& spectrum);

/// Spatial frequencies (cycles/nm) in unshifted DFT order.
struct FrequencyGrid {
  std::size_t m = 0;
  double width = 0.0;
  std::vector<double> kx;   // per pixel, varies along columns
  std::vector<double> ky;   // per pixel, varies along rows
  std::vector<double> ksq;  // kx^2 + ky^2

  double step() const { return 1.0 / width; }
  /// Frequency of DFT index j on an m-point axis, in cycles/nm.
  static double axis_frequency(std::size_t j, std::size_t m, double width);
};

FrequencyGrid frequency_grid(std::size_t m, double width_nm);

enum class WindowShape { Hard, RaisedCosine };

/// Circular analysis window of radius radius_fraction * a about the field
/// centre. Pixel (r, c) sits at ((c - m/2), (r - m/2)) * a/m, so the centre is
/// pixel (m/2, m/2), the same origin used by the specimen projector.
struct DiskMask {
  std::size_t m = 0;
  double radius_fraction = 0.5;
  std::vector<unsigned char> inside;

  bool operator[](std::size_t i) const { return inside[i] != 0; }
  std::size_t true_count() const;
};

DiskMask disk_mask(std::size_t m, double radius_fraction = 0.5);

/// Window weights: 1/0 for the hard disk, or a raised-cosine edge that falls
/// from 1 to 0 over the outer `taper_fraction` of the radius.
std::vector<double> window_weights(std::size_t m, double radius_fraction,
                                   WindowShape shape, double taper_fraction = 0.1);

ScalarField apply_window(const ScalarField& f, std::span<const double> weights);

}  // namespace tienet
