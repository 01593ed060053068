#include "binpick/binsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "binpick/errors.hpp"
#include "binpick/raycast.hpp"

namespace binpick {

namespace {
constexpr double kDiscontinuityLimit = 0.02;  // meters, adjacent pixels
constexpr int kKeypointStride = 4;
constexpr double kMaxPenetration = 0.01;  // meters, bounding spheres
constexpr int kMaxRejections = 1000;
constexpr int kDescentGridHalf = 4;  // 9x9 contact sampling grid
}  // namespace

const char* to_string(PoseClass c) {
  switch (c) {
    case PoseClass::BreastUp: return "BreastUp";
    case PoseClass::BreastDown: return "BreastDown";
    case PoseClass::BreastSide: return "BreastSide";
  }
  return "BreastUp";
}

PoseClass pose_class_from_string(const std::string& name) {
  if (name == "BreastUp") return PoseClass::BreastUp;
  if (name == "BreastDown") return PoseClass::BreastDown;
  if (name == "BreastSide") return PoseClass::BreastSide;
  throw ConfigError("unknown pose class: " + name);
}

PoseClass classify_pose(const UnitQuaternion& orientation) {
  const Vec3 breast = orientation.rotate({0, 0, 1});
  const double quarter = std::cos(std::numbers::pi / 4.0);
  if (breast.z < -quarter) return PoseClass::BreastUp;    // toward camera
  if (breast.z > quarter) return PoseClass::BreastDown;
  return PoseClass::BreastSide;
}

DeformableObject::Params default_bird_params() {
  DeformableObject::Params p;
  p.a = 0.095;
  p.b = 0.07;
  p.c = 0.055;
  p.e1 = 1.0;
  p.e2 = 1.0;
  p.deform_amplitude = 0.12;
  p.deform_seed = 0;
  p.protrusions = {
      {{1, 0, 0}, 0.45, 10},                    // neck
      {{-0.97, 0, 0.24}, 0.18, 8},              // tail, tipped to the breast side
      {{0, 0.95, -0.31}, 0.25, 14},             // wings fold onto the back
      {{0, -0.95, -0.31}, 0.25, 14},
  };
  return p;
}

void SuctionModel::validate() const {
  if (!(cup_radius > 0)) throw ConfigError("cup_radius must be positive");
  if (!(flatness_threshold > 0 && flatness_threshold <= std::numbers::pi))
    throw ConfigError("flatness_threshold must lie in (0, pi]");
  if (!(v0 > 0 && k > 0)) throw ConfigError("voltage curve needs v0, k > 0");
  if (!(v_threshold > 0 && v_threshold <= v0))
    throw ConfigError("v_threshold must lie in the curve range (0, v0]");
  if (!(slip_margin > 0 && slip_margin <= 1))
    throw ConfigError("slip_margin must lie in (0, 1]");
  if (!(clearance >= 0)) throw ConfigError("clearance must be >= 0");
  if (!(descent_start_gap > 0 && descent_step > 0))
    throw ConfigError("descent parameters must be positive");
}

namespace {

UnitQuaternion class_base_rotation(PoseClass c) {
  switch (c) {
    case PoseClass::BreastUp:
      return UnitQuaternion::from_axis_angle({1, 0, 0}, std::numbers::pi);
    case PoseClass::BreastDown:
      return UnitQuaternion::identity();
    case PoseClass::BreastSide:
      return UnitQuaternion::from_axis_angle({1, 0, 0}, std::numbers::pi / 2);
  }
  return UnitQuaternion::identity();
}

Vec3 sample_unit_vector(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n2 = v.squared_norm();
    if (n2 > 1e-12) return v / std::sqrt(n2);
  }
}

PoseClass sample_class(const std::array<double, 3>& mix, Rng& rng) {
  const double total = mix[0] + mix[1] + mix[2];
  if (!(total > 0)) throw ConfigError("class mix weights sum to zero");
  const double r = rng.uniform() * total;
  if (r < mix[0]) return PoseClass::BreastUp;
  if (r < mix[0] + mix[1]) return PoseClass::BreastDown;
  return PoseClass::BreastSide;
}

// Worst radial penetration of sampled surface points of `a` into `b`.
// Radial depth tracks euclidean depth closely for these near-convex shapes.
double penetration_depth(const DeformableObject& a, const RigidTransform& ta,
                         const DeformableObject& b, const RigidTransform& tb) {
  const RigidTransform b_from_world = invert(tb);
  double worst = 0.0;
  const int n = 256;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (i / (n - 1.0));
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const Vec3 d{r * std::cos(golden * i), y, r * std::sin(golden * i)};
    const Vec3 p_world = ta.apply(d * a.radius(d));
    const double g = b.implicit(b_from_world.apply(p_world));
    if (g < 0) worst = std::max(worst, -g);
  }
  return worst;
}

// Extent of the posed object along +z (toward the bin floor), from sampled
// surface directions; used to rest objects on the floor plane.
double support_extent(const DeformableObject& obj, const UnitQuaternion& q) {
  double extent = 0.0;
  const int n = 128;
  for (int i = 0; i < n; ++i) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double y = 1.0 - 2.0 * (i / (n - 1.0));
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const Vec3 d{r * std::cos(golden * i), y, r * std::sin(golden * i)};
    const Vec3 p = q.rotate(d * obj.radius(d));
    extent = std::max(extent, p.z);
  }
  return extent;
}

}  // namespace

BinScene generate_scene(int n, const std::array<double, 3>& class_mix,
                        const SceneConfig& cfg, Rng& rng) {
  if (n < 1) throw ConfigError("scene needs at least one object");
  BinScene scene;
  scene.bin_min = cfg.bin_min;
  scene.bin_max = cfg.bin_max;
  std::vector<DeformableObject> placed_bodies;
  int rejections = 0;
  for (int i = 0; i < n; ++i) {
    SceneObject so;
    so.shape = cfg.base_shape;
    so.shape.deform_amplitude = cfg.deform_amplitude;
    if (!cfg.protrusions) so.shape.protrusions.clear();
    if (cfg.vary_shape) {
      so.shape.a *= rng.uniform(0.9, 1.1);
      so.shape.b *= rng.uniform(0.9, 1.1);
      so.shape.c *= rng.uniform(0.9, 1.1);
      for (auto& pr : so.shape.protrusions) pr.size *= rng.uniform(0.8, 1.2);
      so.shape.deform_seed = rng.bits();
    }
    const DeformableObject obj(so.shape);
    const double rb = obj.bounding_radius();

    const PoseClass cls = sample_class(class_mix, rng);
    const UnitQuaternion yaw = UnitQuaternion::from_axis_angle(
        {0, 0, 1}, rng.uniform(0, 2 * std::numbers::pi));
    const Vec3 axis = sample_unit_vector(rng);
    const UnitQuaternion pert = UnitQuaternion::from_axis_angle(
        axis, rng.uniform(0, cfg.max_perturbation));
    so.pose.rotation = pert * (yaw * class_base_rotation(cls));
    so.pose_class = classify_pose(so.pose.rotation);

    const double x_lo = cfg.bin_min.x + rb, x_hi = cfg.bin_max.x - rb;
    const double y_lo = cfg.bin_min.y + rb, y_hi = cfg.bin_max.y - rb;
    if (x_lo >= x_hi || y_lo >= y_hi)
      throw PlacementFailed("bin is smaller than the object footprint");
    const double z = cfg.bin_max.z - support_extent(obj, so.pose.rotation);

    for (;;) {
      const Vec3 center{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), z};
      const RigidTransform pose{so.pose.rotation, center};
      bool ok = true;
      for (size_t j = 0; j < scene.objects.size() && ok; ++j) {
        // Quick sphere accept before the sampled check.
        const double dist = (center - scene.objects[j].pose.translation).norm();
        if (dist >= rb + placed_bodies[j].bounding_radius()) continue;
        // Generation keeps a 2 mm margin under the 1 cm scene invariant so
        // denser verification sampling cannot exceed it.
        if (penetration_depth(obj, pose, placed_bodies[j],
                              scene.objects[j].pose) > 0.8 * kMaxPenetration ||
            penetration_depth(placed_bodies[j], scene.objects[j].pose, obj,
                              pose) > 0.8 * kMaxPenetration)
          ok = false;
      }
      if (ok) {
        so.pose.translation = center;
        break;
      }
      if (++rejections > kMaxRejections)
        throw PlacementFailed("could not place object " + std::to_string(i) +
                              " after 1000 rejections");
    }
    placed_bodies.push_back(obj);
    scene.objects.push_back(std::move(so));
  }
  return scene;
}

SceneRender render_scene(const BinScene& scene, const CameraIntrinsics& k) {
  k.validate();
  SceneRender out;
  out.depth = DepthImage(k.width, k.height);
  out.object_ids.assign(size_t(k.width) * k.height, -1);
  for (int id = 0; id < static_cast<int>(scene.objects.size()); ++id) {
    const auto& so = scene.objects[size_t(id)];
    const DeformableObject obj(so.shape);
    const PixelRect rect =
        project_bounding_rect(so.pose.translation, obj.bounding_radius(), k);
    for (int v = rect.v0; v <= rect.v1; ++v) {
      for (int u = rect.u0; u <= rect.u1; ++u) {
        const Vec3 dir =
            Vec3{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0}.normalized();
        const double t = raycast(obj, so.pose, {0, 0, 0}, dir);
        if (t <= 0) continue;
        const double z = t * dir.z;
        double& cell = out.depth.at(u, v);
        if (cell == 0.0 || z < cell) {
          cell = z;
          out.object_ids[size_t(v) * k.width + u] = id;
        }
      }
    }
  }
  return out;
}

namespace {

struct PlaneFit {
  Vec3 normal;   // unit, pointing toward the camera (negative z)
  bool ok = false;
};

// Least-squares plane z = a*x + b*y + c over camera-frame points.
PlaneFit fit_plane(const std::vector<Vec3>& pts) {
  PlaneFit f;
  if (pts.size() < 3) return f;
  double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, sn = 0;
  double sxz = 0, syz = 0, sz = 0;
  for (const auto& p : pts) {
    sxx += p.x * p.x;
    sxy += p.x * p.y;
    sx += p.x;
    syy += p.y * p.y;
    sy += p.y;
    sn += 1;
    sxz += p.x * p.z;
    syz += p.y * p.z;
    sz += p.z;
  }
  const double det = sxx * (syy * sn - sy * sy) - sxy * (sxy * sn - sy * sx) +
                     sx * (sxy * sy - syy * sx);
  if (std::abs(det) < 1e-18) return f;
  const double a = (sxz * (syy * sn - sy * sy) - sxy * (syz * sn - sy * sz) +
                    sx * (syz * sy - syy * sz)) /
                   det;
  const double b = (sxx * (syz * sn - sy * sz) - sxz * (sxy * sn - sy * sx) +
                    sx * (sxy * sz - syz * sx)) /
                   det;
  f.normal = Vec3{a, b, -1.0}.normalized();
  f.ok = true;
  return f;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const DepthImage& depth,
                                       const CameraIntrinsics& k,
                                       const SuctionModel& cup) {
  cup.validate();
  k.validate();
  const int w = depth.width, h = depth.height;

  // Per-pixel normals from central differences of deprojected points,
  // oriented toward the camera.
  std::vector<Vec3> normals(size_t(w) * h);
  std::vector<char> has_normal(size_t(w) * h, 0);
  auto point_at = [&](int u, int v) {
    return deproject(u, v, depth.at(u, v), k);
  };
  for (int v = 1; v + 1 < h; ++v) {
    for (int u = 1; u + 1 < w; ++u) {
      if (!depth.valid(u, v) || !depth.valid(u - 1, v) ||
          !depth.valid(u + 1, v) || !depth.valid(u, v - 1) ||
          !depth.valid(u, v + 1))
        continue;
      const Vec3 tu = point_at(u + 1, v) - point_at(u - 1, v);
      const Vec3 tv = point_at(u, v + 1) - point_at(u, v - 1);
      Vec3 n = tu.cross(tv);
      const double len = n.norm();
      if (len < 1e-15) continue;
      n = n / len;
      if (n.z > 0) n = -n;
      normals[size_t(v) * w + u] = n;
      has_normal[size_t(v) * w + u] = 1;
    }
  }

  std::vector<Keypoint> out;
  for (int v = 0; v < h; v += kKeypointStride) {
    for (int u = 0; u < w; u += kKeypointStride) {
      if (!depth.valid(u, v)) continue;
      const double d = depth.at(u, v);
      const double r_px = k.fx * cup.cup_radius / d;
      const int reach = static_cast<int>(std::ceil(r_px)) + 1;
      if (u - reach < 0 || u + reach >= w || v - reach < 0 || v + reach >= h)
        continue;

      bool usable = true;
      std::vector<Vec3> patch_points;
      std::vector<Vec3> patch_normals;
      for (int dv = -reach; dv <= reach && usable; ++dv) {
        for (int du = -reach; du <= reach && usable; ++du) {
          const double rr = double(du) * du + double(dv) * dv;
          if (rr > double(reach) * reach) continue;
          const int uu = u + du, vv = v + dv;
          if (!depth.valid(uu, vv)) {
            usable = false;
            break;
          }
          // Depth discontinuities are an obstruction proxy: a jump inside
          // the cup footprint means the cup bridges two surfaces.
          if (uu + 1 < w && depth.valid(uu + 1, vv) &&
              std::abs(depth.at(uu, vv) - depth.at(uu + 1, vv)) >
                  kDiscontinuityLimit) {
            usable = false;
            break;
          }
          if (vv + 1 < h && depth.valid(uu, vv + 1) &&
              std::abs(depth.at(uu, vv) - depth.at(uu, vv + 1)) >
                  kDiscontinuityLimit) {
            usable = false;
            break;
          }
          if (rr <= r_px * r_px) {
            patch_points.push_back(point_at(uu, vv));
            if (has_normal[size_t(vv) * w + uu])
              patch_normals.push_back(normals[size_t(vv) * w + uu]);
          }
        }
      }
      if (!usable || patch_normals.empty()) continue;
      const PlaneFit plane = fit_plane(patch_points);
      if (!plane.ok) continue;

      double worst = 0.0;
      for (const auto& n : patch_normals) {
        const double c = std::clamp(n.dot(plane.normal), -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
      }
      Keypoint kp;
      kp.u = u;
      kp.v = v;
      kp.half_angle = worst;
      kp.score = 1.0 / (1.0 + worst);
      kp.point = point_at(u, v);
      out.push_back(std::move(kp));
    }
  }
  if (out.empty()) throw NoCandidates("no usable cup-sized patch in view");
  std::stable_sort(out.begin(), out.end(),
                   [](const Keypoint& a, const Keypoint& b) {
                     return a.score > b.score;
                   });
  return out;
}

namespace {

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;  // outward, toward the camera
  int object_id = -1;
  bool hit = false;
};

// First surface along the vertical ray through (x, y); falls back to the
// bin floor plane. Objects are prebuilt once per descent.
SurfaceSample probe_vertical(const BinScene& scene,
                             const std::vector<DeformableObject>& bodies,
                             double x, double y, double z_start) {
  SurfaceSample s;
  double best_t = std::numeric_limits<double>::max();
  const Vec3 origin{x, y, z_start};
  const Vec3 dir{0, 0, 1};
  for (int id = 0; id < static_cast<int>(scene.objects.size()); ++id) {
    const auto& so = scene.objects[size_t(id)];
    const DeformableObject& obj = bodies[size_t(id)];
    const double t = raycast(obj, so.pose, origin, dir);
    if (t > 0 && t < best_t) {
      best_t = t;
      s.point = origin + t * dir;
      const UnitQuaternion rinv = so.pose.rotation.inverse();
      const Vec3 local = rinv.rotate(s.point - so.pose.translation);
      Vec3 n = so.pose.rotation.rotate(obj.normal(local));
      if (n.z > 0) n = -n;
      s.normal = n;
      s.object_id = id;
      s.hit = true;
    }
  }
  if (!s.hit) {
    s.point = {x, y, scene.bin_max.z};
    s.normal = {0, 0, -1};
    s.object_id = -1;
    s.hit = true;
  }
  return s;
}

}  // namespace

DescentResult simulate_descent(const BinScene& scene, const Vec3& keypoint,
                               const SuctionModel& cup) {
  cup.validate();
  DescentResult res;

  std::vector<DeformableObject> bodies;
  bodies.reserve(scene.objects.size());
  for (const auto& so : scene.objects) bodies.emplace_back(so.shape);

  const double z_start = keypoint.z - 0.25;
  const SurfaceSample contact =
      probe_vertical(scene, bodies, keypoint.x, keypoint.y, z_start);
  res.contact_point = contact.point;
  res.object_id = contact.object_id;

  // Voltage rises as the gap closes; the descent stops at the threshold
  // crossing, which v_threshold <= v0 guarantees before contact.
  for (double gap = cup.descent_start_gap; gap > -1e-12;
       gap -= cup.descent_step) {
    const double g = std::max(gap, 0.0);
    const double v = cup.v0 / (1.0 + cup.k * g);
    res.voltage_trace.push_back(v);
    if (v >= cup.v_threshold) break;
  }

  // Sample the cup footprint.
  std::vector<SurfaceSample> samples;
  const double cell = cup.cup_radius / kDescentGridHalf;
  for (int j = -kDescentGridHalf; j <= kDescentGridHalf; ++j) {
    for (int i = -kDescentGridHalf; i <= kDescentGridHalf; ++i) {
      const double dx = i * cell, dy = j * cell;
      if (dx * dx + dy * dy > cup.cup_radius * cup.cup_radius) continue;
      samples.push_back(probe_vertical(scene, bodies, keypoint.x + dx,
                                       keypoint.y + dy, z_start));
    }
  }

  // Split intruding material (rises above the contact plane into the cup
  // body) from the patch the lip can actually touch.
  bool obstructed = false;
  std::vector<Vec3> patch_points;
  std::vector<Vec3> patch_normals;
  for (const auto& s : samples) {
    const double height = (s.point - contact.point).dot(contact.normal);
    if (height > cup.clearance) {
      obstructed = true;
      continue;
    }
    patch_points.push_back(s.point);
    patch_normals.push_back(s.normal);
  }

  double half_angle = 0.0;
  const PlaneFit plane = fit_plane(patch_points);
  const Vec3 ref = plane.ok ? plane.normal : contact.normal;
  for (const auto& n : patch_normals) {
    const double c = std::clamp(n.dot(ref), -1.0, 1.0);
    half_angle = std::max(half_angle, std::acos(c));
  }
  res.contact_half_angle = half_angle;

  if (obstructed) {
    res.seal = false;
    res.cause = PickFailure::Obstructed;
  } else if (half_angle > cup.flatness_threshold) {
    res.seal = false;
    res.cause = PickFailure::NotFlat;
  } else {
    res.seal = true;
    res.cause = PickFailure::None;
  }
  return res;
}

PickAttempt execute_pick(BinScene& scene, TransformTree& tree,
                         const std::vector<Keypoint>& ranked,
                         const SuctionModel& cup) {
  if (ranked.empty()) throw NoCandidates("empty keypoint list");
  PickAttempt attempt;
  attempt.keypoint = ranked.front();
  DescentResult descent = simulate_descent(scene, attempt.keypoint.point, cup);
  attempt.seal = descent.seal;
  attempt.cause = descent.cause;
  attempt.object_id = descent.object_id;
  attempt.contact_half_angle = descent.contact_half_angle;
  attempt.voltage_trace = std::move(descent.voltage_trace);
  if (!attempt.seal) return attempt;

  // The seal must survive the lift with margin; deformable skin slips when
  // the patch is close to the flatness limit.
  if (attempt.contact_half_angle >
      cup.slip_margin * cup.flatness_threshold) {
    attempt.success = false;
    attempt.cause = PickFailure::Slipped;
    return attempt;
  }
  attempt.success = true;

  if (attempt.object_id >= 0) {
    const RigidTransform t_base_camera = tree.lookup("base", "camera");
    const RigidTransform t_base_cup_goal = compose(
        t_base_camera, RigidTransform{UnitQuaternion::identity(),
                                      descent.contact_point});
    const RigidTransform t_wrist_cup = tree.lookup("wrist", "cup");
    tree.replace_edge("base", "wrist",
                      compose(t_base_cup_goal, invert(t_wrist_cup)));
    const RigidTransform t_base_object = compose(
        t_base_camera, scene.objects[size_t(attempt.object_id)].pose);
    tree.add_edge("cup", "object",
                  compose(invert(t_base_cup_goal), t_base_object));
    scene.objects.erase(scene.objects.begin() + attempt.object_id);
  }
  return attempt;
}

PlacementResult evaluate_placement(const RigidTransform& estimated,
                                   const RigidTransform& true_pose,
                                   const RigidTransform& t_wrist_object_true,
                                   const RigidTransform& canonical,
                                   double tolerance) {
  PlacementResult res;
  res.estimated = estimated;
  // Wrist pose consistent with the true grasp, the robot's belief of the
  // grasp from its estimate, and the commanded goal from that belief.
  const RigidTransform t_base_wrist =
      compose(true_pose, invert(t_wrist_object_true));
  const RigidTransform t_wrist_object_est =
      compose(invert(t_base_wrist), estimated);
  const RigidTransform goal =
      canonical_goal(estimated, t_wrist_object_est, canonical);
  res.final_true_pose = compose(goal, t_wrist_object_true);
  res.geodesic_error =
      geodesic_distance(res.final_true_pose.rotation, canonical.rotation);
  res.success = res.geodesic_error <= tolerance;
  return res;
}

const char* to_string(PickFailure f) {
  switch (f) {
    case PickFailure::None: return "none";
    case PickFailure::NotFlat: return "not-flat";
    case PickFailure::Obstructed: return "obstructed";
    case PickFailure::Slipped: return "slipped";
  }
  return "none";
}

void save_scene(const std::string& path, const BinScene& scene) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file: " + path);
  char buf[256];
  out << "SCENE v1\n";
  std::snprintf(buf, sizeof(buf), "bin %.12g %.12g %.12g %.12g %.12g %.12g",
                scene.bin_min.x, scene.bin_min.y, scene.bin_min.z,
                scene.bin_max.x, scene.bin_max.y, scene.bin_max.z);
  out << buf << "\n";
  out << "objects " << scene.objects.size() << "\n";
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& so = scene.objects[i];
    out << "object " << i << "\n";
    std::snprintf(buf, sizeof(buf), "axes %.12g %.12g %.12g", so.shape.a,
                  so.shape.b, so.shape.c);
    out << buf << "\n";
    std::snprintf(buf, sizeof(buf), "exponents %.12g %.12g", so.shape.e1,
                  so.shape.e2);
    out << buf << "\n";
    std::snprintf(buf, sizeof(buf), "deform %.12g %llu",
                  so.shape.deform_amplitude,
                  static_cast<unsigned long long>(so.shape.deform_seed));
    out << buf << "\n";
    out << "class " << to_string(so.pose_class) << "\n";
    out << "protrusions " << so.shape.protrusions.size() << "\n";
    for (const auto& pr : so.shape.protrusions) {
      std::snprintf(buf, sizeof(buf), "protrusion %.12g %.12g %.12g %.12g %.12g",
                    pr.direction.x, pr.direction.y, pr.direction.z, pr.size,
                    pr.sharpness);
      out << buf << "\n";
    }
    out << format_transform_line(
               {"camera", "object_" + std::to_string(i), so.pose})
        << "\n";
  }
}

BinScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file: " + path);
  std::string line, word;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line))
      throw IoError(std::string("scene file truncated at ") + what);
    return std::istringstream(line);
  };

  if (!std::getline(in, line) || line != "SCENE v1")
    throw IoError("not a scene file: " + path);
  BinScene scene;
  {
    auto ss = next_line("bin");
    if (!(ss >> word >> scene.bin_min.x >> scene.bin_min.y >> scene.bin_min.z >>
          scene.bin_max.x >> scene.bin_max.y >> scene.bin_max.z) ||
        word != "bin")
      throw IoError("bad bin line");
  }
  size_t n = 0;
  {
    auto ss = next_line("objects");
    if (!(ss >> word >> n) || word != "objects")
      throw IoError("bad objects line");
  }
  for (size_t i = 0; i < n; ++i) {
    SceneObject so;
    size_t idx = 0;
    {
      auto ss = next_line("object");
      if (!(ss >> word >> idx) || word != "object" || idx != i)
        throw IoError("bad object index line");
    }
    {
      auto ss = next_line("axes");
      if (!(ss >> word >> so.shape.a >> so.shape.b >> so.shape.c) ||
          word != "axes")
        throw IoError("bad axes line");
    }
    {
      auto ss = next_line("exponents");
      if (!(ss >> word >> so.shape.e1 >> so.shape.e2) || word != "exponents")
        throw IoError("bad exponents line");
    }
    {
      auto ss = next_line("deform");
      unsigned long long seed = 0;
      if (!(ss >> word >> so.shape.deform_amplitude >> seed) ||
          word != "deform")
        throw IoError("bad deform line");
      so.shape.deform_seed = seed;
    }
    {
      auto ss = next_line("class");
      std::string cls;
      if (!(ss >> word >> cls) || word != "class")
        throw IoError("bad class line");
      so.pose_class = pose_class_from_string(cls);
    }
    size_t m = 0;
    {
      auto ss = next_line("protrusions");
      if (!(ss >> word >> m) || word != "protrusions")
        throw IoError("bad protrusions line");
    }
    for (size_t p = 0; p < m; ++p) {
      auto ss = next_line("protrusion");
      Protrusion pr;
      if (!(ss >> word >> pr.direction.x >> pr.direction.y >> pr.direction.z >>
            pr.size >> pr.sharpness) ||
          word != "protrusion")
        throw IoError("bad protrusion line");
      so.shape.protrusions.push_back(pr);
    }
    {
      next_line("pose");
      const NamedTransform nt = parse_transform_line(line);
      so.pose = nt.t;
    }
    scene.objects.push_back(std::move(so));
  }
  return scene;
}

}  // namespace binpick
