#pragma once

#include "tienet/grid.hpp"
#include "tienet/optics.hpp"

namespace tienet {

/// Which images the analysis disk is applied to before solving.
enum class Apodization {
  None,
  Derivative,   // window the finite-difference derivative image (default)
  Micrographs,  // window I-, I0 and I+ before differencing
};

struct TieConfig {
  double delta_int = 0.1;        // intensity regulariser, same units as I
  double delta_tie = 0.0;        // frequency regulariser, cycles/nm
  Apodization apodize = Apodization::Derivative;
  double window_radius = 0.5;    // fraction of the field width
  WindowShape window_shape = WindowShape::Hard;

  /// delta_int = 0.1 I_in, delta_tie = 0.1 / (a m).
  static TieConfig standard(double incident_intensity, double width_nm, std::size_t m);

  void validate() const;
};

/// (I+ - I-) / (2 df).
ScalarField intensity_derivative(const ScalarField& over, const ScalarField& under,
                                 double defocus_nm);

/// Tikhonov-regularised replacement for 1/|k|^2: |k|^2 / (|k|^4 + delta^4).
double regularized_inverse_ksq(double ksq, double delta_tie);

/// Tikhonov-regularised replacement for 1/I: I / (I^2 + delta^2).
double regularized_inverse_intensity(double value, double delta_int);

/// Fourier-space TIE solution
///   phi = k/(4 pi^2) F^-1{ q . F[ (1/I0) F^-1( q F(dI/dz) / |q|^2 ) ] / |q|^2 }
/// with both singular factors replaced by their regularised forms.
ScalarField solve_tie(const ScalarField& dIdz, const ScalarField& in_focus, double wavenumber,
                      const TieConfig& cfg);

ScalarField retrieve_phase(const ScalarField& under, const ScalarField& in_focus,
                           const ScalarField& over, const OpticsConfig& optics,
                           const TieConfig& cfg);

}  // namespace tienet
