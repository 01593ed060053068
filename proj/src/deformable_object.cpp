#include "binpick/deformable_object.hpp"

#include <cmath>
#include <numbers>

#include "binpick/errors.hpp"
#include "binpick/rng.hpp"

namespace binpick {

namespace {
constexpr int kFieldTerms = 5;

// pow with an integer fast path; protrusion sharpness is usually integral.
double powd(double base, double exp) {
  const int n = static_cast<int>(exp);
  if (exp == static_cast<double>(n) && n >= 0 && n <= 64) {
    double acc = 1.0;
    double b = base;
    int e = n;
    while (e > 0) {
      if (e & 1) acc *= b;
      b *= b;
      e >>= 1;
    }
    return acc;
  }
  return std::pow(base, exp);
}

Vec3 sample_unit_vector(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n2 = v.squared_norm();
    if (n2 > 1e-12) return v / std::sqrt(n2);
  }
}
}  // namespace

DeformableObject::DeformableObject(const Params& p) : params_(p) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0))
    throw ConfigError("semi-axes must be positive");
  if (!(p.e1 > 0 && p.e1 <= 2 && p.e2 > 0 && p.e2 <= 2))
    throw ConfigError("superellipsoid exponents must lie in (0, 2]");
  if (!(p.deform_amplitude >= 0 && p.deform_amplitude <= 0.3))
    throw ConfigError("deformation amplitude must lie in [0, 0.3]");
  double bump_total = 0.0;
  for (auto& pr : params_.protrusions) {
    const double n = pr.direction.norm();
    if (!(n > 1e-12)) throw ConfigError("protrusion direction is zero");
    if (!(pr.size >= 0)) throw ConfigError("protrusion size must be >= 0");
    if (!(pr.sharpness >= 1)) throw ConfigError("protrusion sharpness < 1");
    pr.direction = pr.direction / n;
    bump_total += pr.size;
  }
  unit_exponents_ = (params_.e1 == 1.0 && params_.e2 == 1.0);

  Rng rng(params_.deform_seed);
  field_terms_.reserve(kFieldTerms);
  field_weight_sum_ = 0.0;
  for (int i = 0; i < kFieldTerms; ++i) {
    FieldTerm t;
    t.direction = sample_unit_vector(rng);
    t.frequency = rng.uniform(1.0, 3.0);
    t.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    t.weight = rng.uniform(0.5, 1.0);
    field_weight_sum_ += t.weight;
    field_terms_.push_back(t);
  }

  // Superellipsoids with exponents in (0, 2] stay inside the axis box, so
  // the box diagonal bounds the base radius.
  const double base_bound =
      std::sqrt(params_.a * params_.a + params_.b * params_.b +
                params_.c * params_.c);
  const double box_bound =
      base_bound * (1.0 + params_.deform_amplitude + bump_total);

  // The box bound is far too loose once protrusions stack up; a dense
  // direction scan with a 5% margin gives a tight radius for ray brackets.
  double sampled = 0.0;
  const int n = 2048;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (i / (n - 1.0));
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const Vec3 d{r * std::cos(golden * i), y, r * std::sin(golden * i)};
    sampled = std::max(sampled, radius(d));
  }
  bounding_radius_ = std::min(box_bound, sampled * 1.05);
}

double DeformableObject::base_radius(const Vec3& d) const {
  if (unit_exponents_) {
    const double fx = d.x / params_.a;
    const double fy = d.y / params_.b;
    const double fz = d.z / params_.c;
    return 1.0 / std::sqrt(fx * fx + fy * fy + fz * fz);
  }
  // F(t*d) = t^(2/e1) * F(d), so the surface lies at t = F(d)^(-e1/2).
  const double px = std::pow(std::abs(d.x / params_.a), 2.0 / params_.e2);
  const double py = std::pow(std::abs(d.y / params_.b), 2.0 / params_.e2);
  const double pz = std::pow(std::abs(d.z / params_.c), 2.0 / params_.e1);
  const double f = std::pow(px + py, params_.e2 / params_.e1) + pz;
  return std::pow(f, -params_.e1 / 2.0);
}

double DeformableObject::field(const Vec3& d) const {
  double acc = 0.0;
  for (const auto& t : field_terms_)
    acc += t.weight *
           std::sin(t.frequency * std::numbers::pi * d.dot(t.direction) +
                    t.phase);
  return acc / field_weight_sum_;
}

double DeformableObject::radius(const Vec3& d) const {
  double gain = 1.0;
  if (params_.deform_amplitude > 0)
    gain += params_.deform_amplitude * field(d);
  for (const auto& pr : params_.protrusions) {
    const double a = d.dot(pr.direction);
    if (a > 0) gain += pr.size * powd(a, pr.sharpness);
  }
  return base_radius(d) * gain;
}

double DeformableObject::implicit(const Vec3& p) const {
  const double n = p.norm();
  if (n < 1e-12) return -radius({0, 0, 1});
  return n - radius(p / n);
}

Vec3 DeformableObject::normal(const Vec3& p) const {
  constexpr double h = 1e-5;
  const Vec3 g{
      implicit({p.x + h, p.y, p.z}) - implicit({p.x - h, p.y, p.z}),
      implicit({p.x, p.y + h, p.z}) - implicit({p.x, p.y - h, p.z}),
      implicit({p.x, p.y, p.z + h}) - implicit({p.x, p.y, p.z - h})};
  const double n = g.norm();
  if (n < 1e-15) return {0, 0, 1};
  return g / n;
}

}  // namespace binpick
