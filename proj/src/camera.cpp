#include "binpick/camera.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "binpick/errors.hpp"
#include "binpick/raycast.hpp"

namespace binpick {

void CameraIntrinsics::validate() const {
  if (!(fx > 0 && fy > 0)) throw ConfigError("focal lengths must be positive");
  if (!(width > 0 && height > 0)) throw ConfigError("image size must be positive");
  if (!(cx > 0 && cx < width && cy > 0 && cy < height))
    throw ConfigError("principal point must lie inside the image");
}

int DepthImage::count_valid() const {
  int n = 0;
  for (double d : data)
    if (d > 0.0) ++n;
  return n;
}

Vec3 deproject(double u, double v, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0)) throw InvalidDepth("depth must be positive");
  if (u < 0 || u >= k.width || v < 0 || v >= k.height)
    throw OutOfBounds("pixel outside image bounds");
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

Pixel project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0)) throw BehindCamera("point has non-positive z");
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

double raycast(const DeformableObject& object, const RigidTransform& pose,
               const Vec3& origin, const Vec3& dir) {
  const UnitQuaternion rinv = pose.rotation.inverse();
  const Vec3 o = rinv.rotate(origin - pose.translation);
  const Vec3 d = rinv.rotate(dir);

  // Bracket against the bounding sphere (object frame, origin-centered).
  const double rb = object.bounding_radius();
  const double b = o.dot(d);
  const double disc = b * b - (o.squared_norm() - rb * rb);
  if (disc < 0) return -1.0;
  const double sq = std::sqrt(disc);
  double t0 = std::max(-b - sq, 1e-6);
  const double t1 = -b + sq;
  if (t1 <= t0) return -1.0;

  auto g = [&](double t) { return object.implicit(o + t * d); };

  double prev_t = t0;
  double prev_g = g(t0);
  if (prev_g <= 0.0) return t0;  // started on or inside the surface
  // Step density sized for the full-diameter chord; grazing rays with short
  // chords need proportionally fewer samples.
  const int steps = std::clamp(
      static_cast<int>(kRaycastMarchSteps * (t1 - t0) / (2.0 * rb)) + 1, 4,
      kRaycastMarchSteps);
  const double step = (t1 - t0) / steps;
  for (int i = 1; i <= steps; ++i) {
    const double t = t0 + i * step;
    const double gt = g(t);
    if (gt <= 0.0) {
      // Bisect [prev_t, t] down to 1e-6 m.
      double lo = prev_t, hi = t;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
    prev_g = gt;
  }
  return -1.0;
}

PixelRect project_bounding_rect(const Vec3& center, double radius,
                                const CameraIntrinsics& k) {
  PixelRect r{0, 0, k.width - 1, k.height - 1};
  if (center.z - radius <= 1e-6) return r;  // cannot bound, test everything
  double min_u = std::numeric_limits<double>::max(), max_u = -min_u;
  double min_v = min_u, max_v = max_u;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner{center.x + ((i & 1) ? radius : -radius),
                      center.y + ((i & 2) ? radius : -radius),
                      center.z + ((i & 4) ? radius : -radius)};
    const Pixel px = project(corner, k);
    min_u = std::min(min_u, px.u);
    max_u = std::max(max_u, px.u);
    min_v = std::min(min_v, px.v);
    max_v = std::max(max_v, px.v);
  }
  r.u0 = std::max(0, static_cast<int>(std::floor(min_u)) - 1);
  r.v0 = std::max(0, static_cast<int>(std::floor(min_v)) - 1);
  r.u1 = std::min(k.width - 1, static_cast<int>(std::ceil(max_u)) + 1);
  r.v1 = std::min(k.height - 1, static_cast<int>(std::ceil(max_v)) + 1);
  return r;
}

DepthImage render_depth(const DeformableObject& object,
                        const RigidTransform& pose,
                        const CameraIntrinsics& k) {
  k.validate();
  DepthImage img(k.width, k.height);
  const PixelRect rect =
      project_bounding_rect(pose.translation, object.bounding_radius(), k);
  int hits = 0;
  for (int v = rect.v0; v <= rect.v1; ++v) {
    for (int u = rect.u0; u <= rect.u1; ++u) {
      const Vec3 dir =
          Vec3{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0}.normalized();
      const double t = raycast(object, pose, {0, 0, 0}, dir);
      if (t > 0) {
        img.at(u, v) = t * dir.z;
        ++hits;
      }
    }
  }
  if (hits == 0) throw EmptyRender("object projects onto no pixel");
  return img;
}

namespace {

Silhouette component_from(const DepthImage& img, int start_u, int start_v) {
  Silhouette s;
  std::vector<char> seen(img.data.size(), 0);
  std::deque<std::pair<int, int>> queue;
  queue.emplace_back(start_u, start_v);
  seen[size_t(start_v) * img.width + start_u] = 1;
  double sum_u = 0, sum_v = 0;
  s.min_u = s.max_u = start_u;
  s.min_v = s.max_v = start_v;
  while (!queue.empty()) {
    const auto [u, v] = queue.front();
    queue.pop_front();
    ++s.pixel_count;
    sum_u += u;
    sum_v += v;
    s.min_u = std::min(s.min_u, u);
    s.max_u = std::max(s.max_u, u);
    s.min_v = std::min(s.min_v, v);
    s.max_v = std::max(s.max_v, v);
    const int du[4] = {1, -1, 0, 0};
    const int dv[4] = {0, 0, 1, -1};
    for (int i = 0; i < 4; ++i) {
      const int nu = u + du[i], nv = v + dv[i];
      if (!img.in_bounds(nu, nv) || !img.valid(nu, nv)) continue;
      char& flag = seen[size_t(nv) * img.width + nu];
      if (!flag) {
        flag = 1;
        queue.emplace_back(nu, nv);
      }
    }
  }
  s.centroid_u = sum_u / s.pixel_count;
  s.centroid_v = sum_v / s.pixel_count;

  // Depth sampled at the component pixel nearest to the centroid.
  double best_d2 = std::numeric_limits<double>::max();
  for (int v = s.min_v; v <= s.max_v; ++v) {
    for (int u = s.min_u; u <= s.max_u; ++u) {
      if (!seen[size_t(v) * img.width + u] || !img.valid(u, v)) continue;
      const double d2 = (u - s.centroid_u) * (u - s.centroid_u) +
                        (v - s.centroid_v) * (v - s.centroid_v);
      if (d2 < best_d2) {
        best_d2 = d2;
        s.depth_at_centroid = img.at(u, v);
      }
    }
  }
  return s;
}

std::pair<int, int> nearest_valid_pixel(const DepthImage& img, double seed_u,
                                        double seed_v) {
  double best_d2 = std::numeric_limits<double>::max();
  int bu = -1, bv = -1;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (!img.valid(u, v)) continue;
      const double d2 =
          (u - seed_u) * (u - seed_u) + (v - seed_v) * (v - seed_v);
      if (d2 < best_d2) {
        best_d2 = d2;
        bu = u;
        bv = v;
      }
    }
  }
  if (bu < 0) throw EmptyImage("image has no valid pixel");
  return {bu, bv};
}

}  // namespace

Silhouette find_silhouette(const DepthImage& img, double seed_u,
                           double seed_v) {
  const auto [u, v] = nearest_valid_pixel(img, seed_u, seed_v);
  return component_from(img, u, v);
}

Silhouette find_silhouette(const DepthImage& img) {
  double sum_u = 0, sum_v = 0;
  int n = 0;
  for (int v = 0; v < img.height; ++v)
    for (int u = 0; u < img.width; ++u)
      if (img.valid(u, v)) {
        sum_u += u;
        sum_v += v;
        ++n;
      }
  if (n == 0) throw EmptyImage("image has no valid pixel");
  return find_silhouette(img, sum_u / n, sum_v / n);
}

DepthImage crop_silhouette(const DepthImage& img, const Silhouette& s,
                           const CropRule& rule) {
  DepthImage out(rule.size, rule.size);
  const double side =
      rule.scale * std::max(s.max_u - s.min_u + 1, s.max_v - s.min_v + 1);
  const double px = side / rule.size;
  for (int j = 0; j < rule.size; ++j) {
    for (int i = 0; i < rule.size; ++i) {
      const int su = static_cast<int>(
          std::lround(s.centroid_u + (i + 0.5 - rule.size / 2.0) * px));
      const int sv = static_cast<int>(
          std::lround(s.centroid_v + (j + 0.5 - rule.size / 2.0) * px));
      if (img.in_bounds(su, sv)) out.at(i, j) = img.at(su, sv);
    }
  }
  return out;
}

void save_depth_text(const std::string& path, const DepthImage& img) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write depth file: " + path);
  out << "DEPTH " << img.width << " " << img.height << "\n";
  char buf[32];
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      std::snprintf(buf, sizeof(buf), "%.9g", img.at(u, v));
      out << buf << (u + 1 == img.width ? "" : " ");
    }
    out << "\n";
  }
}

DepthImage load_depth_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open depth file: " + path);
  std::string magic;
  int w = 0, h = 0;
  if (!(in >> magic >> w >> h) || magic != "DEPTH" || w <= 0 || h <= 0)
    throw IoError("bad depth header in " + path);
  DepthImage img(w, h);
  for (double& d : img.data) {
    if (!(in >> d)) throw IoError("truncated depth data in " + path);
    if (!(d >= 0) || !std::isfinite(d))
      throw IoError("negative or non-finite depth in " + path);
  }
  return img;
}

void save_ppm(const std::string& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ppm: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
}

RgbImage depth_to_rgb(const DepthImage& img) {
  RgbImage rgb(img.width, img.height);
  double lo = std::numeric_limits<double>::max(), hi = 0.0;
  for (double d : img.data)
    if (d > 0) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  const double span = (hi > lo) ? hi - lo : 1.0;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const double d = img.at(u, v);
      std::uint8_t g = 0;
      if (d > 0)
        g = static_cast<std::uint8_t>(255 - 191 * ((d - lo) / span));
      std::uint8_t* p = rgb.at(u, v);
      p[0] = p[1] = p[2] = g;
    }
  }
  return rgb;
}

}  // namespace binpick
