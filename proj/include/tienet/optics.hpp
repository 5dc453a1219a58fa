#pragma once

#include <cstdint>

#include "tienet/grid.hpp"

namespace tienet {

namespace physical {
// CODATA 2018 exact / recommended values, SI units.
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double speed_of_light = 299792458.0;     // m/s
}  // namespace physical

/// Relativistic electron wavelength (nm) for an accelerating voltage in volts.
double electron_wavelength(double accelerating_voltage);

/// Interaction constant sigma (rad V^-1 nm^-1).
double interaction_constant(double accelerating_voltage);

struct OpticsConfig {
  double accelerating_voltage = 3.0e5;  // V
  double wavelength = 0.0;              // nm, derived
  double wavenumber = 0.0;              // rad/nm, 2 pi / wavelength
  double interaction = 0.0;             // sigma, rad V^-1 nm^-1
  Complex potential{-17.0, 1.0};        // V
  double defocus = 8.0e3;               // nm
  double incident_intensity = 1.0;
  double noise_level = 0.15;

  /// Builds a config with all derived quantities filled in and validated.
  static OpticsConfig make(double accelerating_voltage, double defocus_nm, double noise_level,
                           Complex potential = {-17.0, 1.0}, double incident_intensity = 1.0);

  void validate() const;
};

/// Fresnel propagation by the free-space transfer function
/// exp(-i pi lambda z |k|^2), k in cycles/nm. Negative distances propagate
/// backwards (under-focus).
ComplexField propagate(const ComplexField& psi, double distance_nm, double wavelength_nm);

struct DefocusSeries {
  ScalarField under;
  ScalarField in_focus;
  ScalarField over;
};

DefocusSeries defocus_series(const ComplexField& exit_wave, double defocus_nm,
                             double wavelength_nm);

/// Scaled Poisson shot noise: with n = 1/level^2 mean counts at the incident
/// intensity, every pixel becomes Poisson(n I / I_in) * I_in / n.
ScalarField add_shot_noise(const ScalarField& image, double noise_level,
                           double incident_intensity, std::uint64_t seed);

}  // namespace tienet
