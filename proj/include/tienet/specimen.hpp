#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "tienet/grid.hpp"
#include "tienet/optics.hpp"

namespace tienet {

using Vec3 = std::array<double, 3>;

struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Vec3 rotate(const Vec3& v) const;
  Vec3 rotate_inverse(const Vec3& v) const;
  double norm() const;

  bool operator==(const Quaternion&) const = default;
};

// Deformations act in the box frame and never move the box-frame z
// coordinate, so each has a closed-form inverse.

/// Rotates (x, y) by angle * z / (2 hz): the two end faces end up rotated
/// by +-angle/2 relative to each other.
struct Twist {
  double angle = 0.0;  // rad, [-pi/2, pi/2]
  bool operator==(const Twist&) const = default;
};

/// Scales (x, y) by 1 + (factor - 1) z / hz, i.e. by `factor` at the top face
/// and 2 - factor at the bottom face.
struct Taper {
  double factor = 1.0;  // [0.5, 1.5]
  bool operator==(const Taper&) const = default;
};

/// Shifts x by amplitude * sin(pi * cycles * (z / hz + 1)).
struct Ripple {
  double amplitude = 0.0;  // nm, [0, 0.05 a]
  int cycles = 1;          // {1, 2, 3}
  bool operator==(const Ripple&) const = default;
};

using Deformation = std::variant<Twist, Taper, Ripple>;

struct SpecimenSpec {
  std::uint64_t seed = 0;
  Vec3 half_extents{};          // nm
  std::array<double, 2> centre{};  // nm, offset from the field centre
  Quaternion rotation;
  std::vector<Deformation> modifiers;  // applied in order, box frame -> world
  Complex potential{-17.0, 1.0};

  bool operator==(const SpecimenSpec&) const = default;
};

/// Sampling ranges. Lengths are fractions of the field width unless noted.
struct SpecimenRanges {
  double width = 150.0;  // nm
  double half_extent_min = 0.05;
  double half_extent_max = 0.12;
  double centre_max = 0.15;
  double footprint_radius = 0.45;
  /// Safety band inside the footprint radius that absorbs surface-sampling gaps.
  double footprint_margin = 0.02;
  /// Upper bound on peak projected thickness.
  double max_thickness = 0.28;
  double twist_max = 1.5707963267948966;
  double taper_min = 0.5;
  double taper_max = 1.5;
  double ripple_max = 0.05;
  Complex potential{-17.0, 1.0};
  int max_attempts = 1000;
};

/// Deterministic per seed. Candidates whose footprint leaves the allowed disk
/// or whose peak thickness exceeds the bound are redrawn from
/// derive_seed(seed, streams::reject, attempt).
SpecimenSpec sample_spec(std::uint64_t seed, const SpecimenRanges& ranges = {});

/// Box frame -> world (nm).
Vec3 to_world(const SpecimenSpec& spec, const Vec3& box_point);
/// World -> box frame. Exact inverse of to_world.
Vec3 to_box(const SpecimenSpec& spec, const Vec3& world_point);
bool contains(const SpecimenSpec& spec, const Vec3& world_point);

/// Largest radial (x, y) distance of the deformed box surface from the field
/// centre, estimated from `samples_per_edge`^2 points on every face.
double footprint_radius(const SpecimenSpec& spec, int samples_per_edge = 33);

inline constexpr std::size_t kDefaultZSlices = 128;

/// Projected thickness: dz times the number of z samples inside the body, with
/// zslices samples spanning [-0.3 a, 0.3 a].
ScalarField thickness_map(const SpecimenSpec& spec, std::size_t m, double width_nm,
                          std::size_t zslices = kDefaultZSlices);

/// sigma * Re(V) * t.
ScalarField exact_phase(const ScalarField& thickness, const OpticsConfig& optics);

/// sqrt(I_in) * exp(i sigma Re(V) t) * exp(-sigma Im(V) t).
ComplexField exit_wave(const ScalarField& thickness, const OpticsConfig& optics);

}  // namespace tienet
