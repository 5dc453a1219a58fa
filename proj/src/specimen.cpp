#include "tienet/specimen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tienet/error.hpp"
#include "tienet/seeds.hpp"

namespace tienet {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// v' = v + 2w (u x v) + 2 u x (u x v), u = vector part of a unit quaternion.
Vec3 rotate_by(double w, const Vec3& u, const Vec3& v) {
  const Vec3 t = cross(u, v);
  const Vec3 tt = cross(u, t);
  return {v[0] + 2.0 * (w * t[0] + tt[0]), v[1] + 2.0 * (w * t[1] + tt[1]),
          v[2] + 2.0 * (w * t[2] + tt[2])};
}

struct ForwardDeform {
  const Vec3& h;
  Vec3& p;
  void operator()(const Twist& d) const {
    const double th = d.angle * p[2] / (2.0 * h[2]);
    const double c = std::cos(th), s = std::sin(th);
    p = {c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]};
  }
  void operator()(const Taper& d) const {
    const double k = 1.0 + (d.factor - 1.0) * p[2] / h[2];
    p[0] *= k;
    p[1] *= k;
  }
  void operator()(const Ripple& d) const {
    p[0] += d.amplitude * std::sin(std::numbers::pi * d.cycles * (p[2] / h[2] + 1.0));
  }
};

struct InverseDeform {
  const Vec3& h;
  Vec3& p;
  void operator()(const Twist& d) const {
    const double th = -d.angle * p[2] / (2.0 * h[2]);
    const double c = std::cos(th), s = std::sin(th);
    p = {c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]};
  }
  void operator()(const Taper& d) const {
    const double k = 1.0 + (d.factor - 1.0) * p[2] / h[2];
    p[0] /= k;
    p[1] /= k;
  }
  void operator()(const Ripple& d) const {
    p[0] -= d.amplitude * std::sin(std::numbers::pi * d.cycles * (p[2] / h[2] + 1.0));
  }
};

Quaternion uniform_rotation(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
  return {b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3)};
}

SpecimenSpec draw_candidate(std::uint64_t seed, std::uint64_t draw_seed,
                            const SpecimenRanges& r) {
  std::mt19937_64 rng(draw_seed);
  const double a = r.width;
  SpecimenSpec spec;
  spec.seed = seed;
  spec.potential = r.potential;
  for (double& h : spec.half_extents) {
    h = uniform(rng, r.half_extent_min * a, r.half_extent_max * a);
  }
  const double radius = r.centre_max * a * std::sqrt(uniform01(rng));
  const double angle = 2.0 * std::numbers::pi * uniform01(rng);
  spec.centre = {radius * std::cos(angle), radius * std::sin(angle)};
  spec.rotation = uniform_rotation(rng);

  // Pick 1-3 distinct modifier kinds; keep them in the canonical
  // twist, taper, ripple order.
  const int count = 1 + static_cast<int>(rng() % 3);
  std::array<int, 3> kinds{0, 1, 2};
  for (int i = 2; i > 0; --i) {
    std::swap(kinds[i], kinds[rng() % static_cast<std::uint64_t>(i + 1)]);
  }
  std::sort(kinds.begin(), kinds.begin() + count);
  for (int i = 0; i < count; ++i) {
    switch (kinds[i]) {
      case 0:
        spec.modifiers.emplace_back(Twist{uniform(rng, -r.twist_max, r.twist_max)});
        break;
      case 1:
        spec.modifiers.emplace_back(Taper{uniform(rng, r.taper_min, r.taper_max)});
        break;
      default: {
        const double amp = uniform(rng, 0.0, r.ripple_max * a);
        spec.modifiers.emplace_back(Ripple{amp, 1 + static_cast<int>(rng() % 3)});
        break;
      }
    }
  }
  return spec;
}

double peak(const ScalarField& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

}  // namespace

Vec3 Quaternion::rotate(const Vec3& v) const { return rotate_by(w, {x, y, z}, v); }

Vec3 Quaternion::rotate_inverse(const Vec3& v) const { return rotate_by(w, {-x, -y, -z}, v); }

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Vec3 to_world(const SpecimenSpec& spec, const Vec3& box_point) {
  Vec3 p = box_point;
  for (const auto& d : spec.modifiers) std::visit(ForwardDeform{spec.half_extents, p}, d);
  p = spec.rotation.rotate(p);
  return {p[0] + spec.centre[0], p[1] + spec.centre[1], p[2]};
}

Vec3 to_box(const SpecimenSpec& spec, const Vec3& world_point) {
  Vec3 p{world_point[0] - spec.centre[0], world_point[1] - spec.centre[1], world_point[2]};
  p = spec.rotation.rotate_inverse(p);
  for (auto it = spec.modifiers.rbegin(); it != spec.modifiers.rend(); ++it) {
    std::visit(InverseDeform{spec.half_extents, p}, *it);
  }
  return p;
}

bool contains(const SpecimenSpec& spec, const Vec3& world_point) {
  const auto& h = spec.half_extents;
  Vec3 p{world_point[0] - spec.centre[0], world_point[1] - spec.centre[1], world_point[2]};
  p = spec.rotation.rotate_inverse(p);
  // Deformations keep z, and taper is only invertible for |z| <= hz.
  if (std::abs(p[2]) > h[2]) return false;
  for (auto it = spec.modifiers.rbegin(); it != spec.modifiers.rend(); ++it) {
    std::visit(InverseDeform{h, p}, *it);
  }
  return std::abs(p[0]) <= h[0] && std::abs(p[1]) <= h[1];
}

double footprint_radius(const SpecimenSpec& spec, int samples_per_edge) {
  const auto& h = spec.half_extents;
  const int n = std::max(samples_per_edge, 2);
  double rmax = 0.0;
  auto visit = [&](const Vec3& p) {
    const Vec3 w = to_world(spec, p);
    rmax = std::max(rmax, std::hypot(w[0], w[1]));
  };
  for (int i = 0; i < n; ++i) {
    const double s = -1.0 + 2.0 * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double t = -1.0 + 2.0 * j / (n - 1);
      for (double side : {-1.0, 1.0}) {
        visit({side * h[0], s * h[1], t * h[2]});
        visit({s * h[0], side * h[1], t * h[2]});
        visit({s * h[0], t * h[1], side * h[2]});
      }
    }
  }
  return rmax;
}

SpecimenSpec sample_spec(std::uint64_t seed, const SpecimenRanges& ranges) {
  if (!(ranges.width > 0.0) || ranges.half_extent_min <= 0.0 ||
      ranges.half_extent_max < ranges.half_extent_min) {
    throw Error(ErrorCode::Configuration, "specimen ranges are inconsistent");
  }
  const double a = ranges.width;
  const double allowed = (ranges.footprint_radius - ranges.footprint_margin) * a;
  for (int attempt = 0; attempt < ranges.max_attempts; ++attempt) {
    const std::uint64_t draw =
        attempt == 0 ? seed : derive_seed(seed, streams::reject, static_cast<std::uint64_t>(attempt));
    SpecimenSpec spec = draw_candidate(seed, draw, ranges);
    if (footprint_radius(spec) > allowed) continue;
    if (peak(thickness_map(spec, 64, a)) > ranges.max_thickness * a) continue;
    return spec;
  }
  throw Error(ErrorCode::GenerationFailure,
              "specimen rejected " + std::to_string(ranges.max_attempts) +
                  " times; sampling ranges cannot satisfy the footprint bounds");
}

ScalarField thickness_map(const SpecimenSpec& spec, std::size_t m, double width_nm,
                          std::size_t zslices) {
  if (zslices < 64) throw Error(ErrorCode::InvalidArgument, "thickness_map needs >= 64 z-slices");
  ScalarField t(m, width_nm);
  const double dx = width_nm / static_cast<double>(m);
  const double z0 = -0.3 * width_nm;
  const double dz = 0.6 * width_nm / static_cast<double>(zslices);
  const double half = 0.5 * static_cast<double>(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double y = (static_cast<double>(r) - half) * dx;
    for (std::size_t c = 0; c < m; ++c) {
      const double x = (static_cast<double>(c) - half) * dx;
      std::size_t inside = 0;
      for (std::size_t k = 0; k < zslices; ++k) {
        const double z = z0 + (static_cast<double>(k) + 0.5) * dz;
        inside += contains(spec, {x, y, z}) ? 1 : 0;
      }
      t(r, c) = dz * static_cast<double>(inside);
    }
  }
  return t;
}

ScalarField exact_phase(const ScalarField& thickness, const OpticsConfig& optics) {
  ScalarField phase(thickness.size(), thickness.width());
  const double scale = optics.interaction * optics.potential.real();
  for (std::size_t i = 0; i < thickness.count(); ++i) phase[i] = scale * thickness[i];
  return phase;
}

ComplexField exit_wave(const ScalarField& thickness, const OpticsConfig& optics) {
  ComplexField psi(thickness.size(), thickness.width());
  const double amplitude = std::sqrt(optics.incident_intensity);
  const double re = optics.interaction * optics.potential.real();
  const double im = optics.interaction * optics.potential.imag();
  for (std::size_t i = 0; i < thickness.count(); ++i) {
    psi[i] = std::polar(amplitude * std::exp(-im * thickness[i]), re * thickness[i]);
  }
  return psi;
}

}  // namespace tienet
