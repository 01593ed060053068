#pragma once

#include <cstdint>
#include <vector>

#include "binpick/linalg.hpp"

namespace binpick {

// Directional bump on the base surface, e.g. a wing or a neck.
// Radial gain is size * max(0, dot(dir, d))^sharpness.
struct Protrusion {
  Vec3 direction{1, 0, 0};  // normalized on construction
  double size = 0.2;        // fraction of the local base radius, >= 0
  double sharpness = 12.0;  // >= 1
};

// Star-shaped closed surface: a superellipsoid base radius modulated by a
// seeded smooth perturbation field and a set of protrusions,
//   r(d) = r0(d) * (1 + alpha * field(d) + sum_k bump_k(d)).
// alpha <= 0.3 and bump sizes >= 0 keep r(d) positive everywhere. The field
// is fully determined by deform_seed, so identical params give identical
// geometry.
class DeformableObject {
 public:
  struct Params {
    double a = 0.09;  // semi-axes, meters
    double b = 0.065;
    double c = 0.055;
    double e1 = 1.0;  // superellipsoid exponents, (0, 2]
    double e2 = 1.0;
    double deform_amplitude = 0.12;  // alpha in [0, 0.3]
    std::uint64_t deform_seed = 0;
    std::vector<Protrusion> protrusions;
  };

  explicit DeformableObject(const Params& p);  // ConfigError on bad params

  // Surface distance from the origin along unit direction d.
  double radius(const Vec3& d) const;

  // Signed inside-outside value ||p|| - r(p/||p||); negative inside.
  double implicit(const Vec3& p) const;

  // Outward unit normal of the implicit surface at (or near) point p,
  // from central differences.
  Vec3 normal(const Vec3& p) const;

  // Conservative: the surface never exceeds this distance from the origin.
  double bounding_radius() const { return bounding_radius_; }

  const Params& params() const { return params_; }

 private:
  struct FieldTerm {
    Vec3 direction;
    double frequency;
    double phase;
    double weight;
  };
  double base_radius(const Vec3& d) const;
  double field(const Vec3& d) const;

  Params params_;
  std::vector<FieldTerm> field_terms_;
  double field_weight_sum_ = 1.0;
  double bounding_radius_ = 0.0;
  bool unit_exponents_ = false;
};

}  // namespace binpick
