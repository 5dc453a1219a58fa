#include "tienet/optics.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tienet/error.hpp"

namespace tienet {

namespace {

void require_positive_voltage(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, "accelerating voltage must be positive");
  }
}

// Rest energy of the electron in eV, so e*V reduces to V.
double rest_energy_ev() {
  using namespace physical;
  return electron_mass * speed_of_light * speed_of_light / elementary_charge;
}

}  // namespace

double electron_wavelength(double accelerating_voltage) {
  require_positive_voltage(accelerating_voltage);
  using namespace physical;
  const double eV = elementary_charge * accelerating_voltage;
  const double p = std::sqrt(2.0 * electron_mass * eV *
                             (1.0 + eV / (2.0 * electron_mass * speed_of_light * speed_of_light)));
  return planck / p * 1e9;
}

double interaction_constant(double accelerating_voltage) {
  require_positive_voltage(accelerating_voltage);
  const double lambda = electron_wavelength(accelerating_voltage);
  const double e0 = rest_energy_ev();
  return 2.0 * std::numbers::pi / (lambda * accelerating_voltage) *
         (e0 + accelerating_voltage) / (2.0 * e0 + accelerating_voltage);
}

OpticsConfig OpticsConfig::make(double accelerating_voltage, double defocus_nm,
                                double noise_level, Complex potential,
                                double incident_intensity) {
  OpticsConfig c;
  c.accelerating_voltage = accelerating_voltage;
  c.wavelength = electron_wavelength(accelerating_voltage);
  c.wavenumber = 2.0 * std::numbers::pi / c.wavelength;
  c.interaction = interaction_constant(accelerating_voltage);
  c.potential = potential;
  c.defocus = defocus_nm;
  c.incident_intensity = incident_intensity;
  c.noise_level = noise_level;
  c.validate();
  return c;
}

void OpticsConfig::validate() const {
  if (!(wavelength > 0.0) || !(wavenumber > 0.0) || !(interaction > 0.0)) {
    throw Error(ErrorCode::Configuration, "optics: derived constants must be positive");
  }
  if (!(defocus > 0.0)) throw Error(ErrorCode::Configuration, "optics: defocus must be positive");
  if (!(noise_level >= 0.0 && noise_level < 1.0)) {
    throw Error(ErrorCode::Configuration, "optics: noise level must lie in [0, 1)");
  }
  if (!(incident_intensity > 0.0)) {
    throw Error(ErrorCode::Configuration, "optics: incident intensity must be positive");
  }
}

ComplexField propagate(const ComplexField& psi, double distance_nm, double wavelength_nm) {
  if (distance_nm == 0.0) return psi;
  const FrequencyGrid grid = frequency_grid(psi.size(), psi.width());
  ComplexField spectrum = spectral_forward(psi);
  const double scale = -std::numbers::pi * wavelength_nm * distance_nm;
  for (std::size_t i = 0; i < spectrum.count(); ++i) {
    spectrum[i] *= std::polar(1.0, scale * grid.ksq[i]);
  }
  return spectral_inverse(spectrum);
}

DefocusSeries defocus_series(const ComplexField& exit_wave, double defocus_nm,
                             double wavelength_nm) {
  if (!(defocus_nm > 0.0)) throw Error(ErrorCode::InvalidArgument, "defocus must be positive");
  return {intensity(propagate(exit_wave, -defocus_nm, wavelength_nm)), intensity(exit_wave),
          intensity(propagate(exit_wave, defocus_nm, wavelength_nm))};
}

ScalarField add_shot_noise(const ScalarField& image, double noise_level,
                           double incident_intensity, std::uint64_t seed) {
  if (!(noise_level >= 0.0 && noise_level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise level must lie in [0, 1)");
  }
  for (double v : image.values()) {
    if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "negative intensity passed to shot noise");
  }
  if (noise_level == 0.0) return image;

  const double counts_at_incident = 1.0 / (noise_level * noise_level);
  std::mt19937_64 rng(seed);
  ScalarField out(image.size(), image.width());
  for (std::size_t i = 0; i < image.count(); ++i) {
    const double mean = counts_at_incident * image[i] / incident_intensity;
    double counts = 0.0;
    if (mean > 0.0) {
      std::poisson_distribution<long long> poisson(mean);
      counts = static_cast<double>(poisson(rng));
    }
    out[i] = counts * incident_intensity / counts_at_incident;
  }
  return out;
}

}  // namespace tienet
