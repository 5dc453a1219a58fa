#include "tienet/tie.hpp"

#include <cmath>
#include <numbers>

#include "tienet/error.hpp"

namespace tienet {

TieConfig TieConfig::standard(double incident_intensity, double width_nm, std::size_t m) {
  TieConfig cfg;
  cfg.delta_int = 0.1 * incident_intensity;
  cfg.delta_tie = 0.1 / (width_nm * static_cast<double>(m));
  return cfg;
}

void TieConfig::validate() const {
  if (!(delta_int > 0.0) || !(delta_tie > 0.0)) {
    throw Error(ErrorCode::Configuration, "TIE regularisers must be positive");
  }
}

ScalarField intensity_derivative(const ScalarField& over, const ScalarField& under,
                                 double defocus_nm) {
  require_same_shape(over, under, "intensity_derivative");
  if (!(defocus_nm > 0.0)) throw Error(ErrorCode::InvalidArgument, "defocus must be positive");
  ScalarField d(over.size(), over.width());
  const double inv = 1.0 / (2.0 * defocus_nm);
  for (std::size_t i = 0; i < d.count(); ++i) d[i] = (over[i] - under[i]) * inv;
  return d;
}

double regularized_inverse_ksq(double ksq, double delta_tie) {
  const double d2 = delta_tie * delta_tie;
  return ksq / (ksq * ksq + d2 * d2);
}

double regularized_inverse_intensity(double value, double delta_int) {
  return value / (value * value + delta_int * delta_int);
}

ScalarField solve_tie(const ScalarField& dIdz, const ScalarField& in_focus, double wavenumber,
                      const TieConfig& cfg) {
  require_same_shape(dIdz, in_focus, "solve_tie");
  require_finite(dIdz, "solve_tie derivative");
  require_finite(in_focus, "solve_tie intensity");
  cfg.validate();

  const std::size_t m = dIdz.size();
  const double a = dIdz.width();
  const FrequencyGrid g = frequency_grid(m, a);
  std::vector<double> filter(g.ksq.size());
  for (std::size_t i = 0; i < filter.size(); ++i) {
    filter[i] = regularized_inverse_ksq(g.ksq[i], cfg.delta_tie);
  }

  // (i) q_j F(dI/dz) reg(q), j = x, y
  const ComplexField source = spectral_forward(to_complex(dIdz));
  ComplexField gx(m, a), gy(m, a);
  for (std::size_t i = 0; i < source.count(); ++i) {
    gx[i] = g.kx[i] * filter[i] * source[i];
    gy[i] = g.ky[i] * filter[i] * source[i];
  }
  // (ii) back to real space, divide by the regularised intensity
  gx = spectral_inverse(gx);
  gy = spectral_inverse(gy);
  for (std::size_t i = 0; i < gx.count(); ++i) {
    const double inv_i = regularized_inverse_intensity(in_focus[i], cfg.delta_int);
    gx[i] *= inv_i;
    gy[i] *= inv_i;
  }
  // (iii) divergence in Fourier space
  gx = spectral_forward(gx);
  gy = spectral_forward(gy);
  ComplexField div(m, a);
  for (std::size_t i = 0; i < div.count(); ++i) {
    div[i] = (g.kx[i] * gx[i] + g.ky[i] * gy[i]) * filter[i];
  }
  // (iv)
  div = spectral_inverse(div);
  const double prefactor = wavenumber / (4.0 * std::numbers::pi * std::numbers::pi);
  ScalarField phase(m, a);
  for (std::size_t i = 0; i < phase.count(); ++i) phase[i] = prefactor * div[i].real();
  return phase;
}

ScalarField retrieve_phase(const ScalarField& under, const ScalarField& in_focus,
                           const ScalarField& over, const OpticsConfig& optics,
                           const TieConfig& cfg) {
  require_same_shape(under, in_focus, "retrieve_phase");
  require_same_shape(over, in_focus, "retrieve_phase");
  optics.validate();
  cfg.validate();

  if (cfg.apodize == Apodization::None) {
    return solve_tie(intensity_derivative(over, under, optics.defocus), in_focus,
                     optics.wavenumber, cfg);
  }
  const auto w = window_weights(in_focus.size(), cfg.window_radius, cfg.window_shape);
  if (cfg.apodize == Apodization::Derivative) {
    return solve_tie(apply_window(intensity_derivative(over, under, optics.defocus), w),
                     in_focus, optics.wavenumber, cfg);
  }
  // Outside the disk the windowed I0 is zero, so the regularised 1/I0 is zero too.
  return solve_tie(intensity_derivative(apply_window(over, w), apply_window(under, w),
                                        optics.defocus),
                   apply_window(in_focus, w), optics.wavenumber, cfg);
}

}  // namespace tienet
