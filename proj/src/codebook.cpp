#include "binpick/codebook.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "binpick/errors.hpp"
#include "binpick/parallel.hpp"

namespace binpick {

void ViewSampling::validate() const {
  if (n_views < 4) throw ConfigError("n_views must be >= 4");
  if (n_inplane < 1) throw ConfigError("n_inplane must be >= 1");
}

namespace {

constexpr double kPoleNudge = 1e-3;  // radians

Vec3 fibonacci_point(int i, int n) {
  // Golden-angle spiral along the y axis; i = 0 and i = n-1 sit at the poles.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double denom = n > 1 ? n - 1.0 : 1.0;
  const double y = 1.0 - 2.0 * (i / denom);
  const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
  const double theta = golden * i;
  return {r * std::cos(theta), y, r * std::sin(theta)};
}

UnitQuaternion look_at_rotation(Vec3 v) {
  const Vec3 up{0, 1, 0};
  if (std::abs(v.dot(up)) > std::cos(kPoleNudge)) {
    // Tilt pole viewpoints off the up axis.
    const double c = std::cos(kPoleNudge), s = std::sin(kPoleNudge);
    v = Vec3{v.x, v.y * c - v.z * s, v.y * s + v.z * c}.normalized();
  }
  const Vec3 r3 = -v;  // camera z expressed in the object frame
  const Vec3 r1 = up.cross(r3).normalized();
  const Vec3 r2 = r3.cross(r1);
  RotationMatrix m;
  m.m = {r1.x, r1.y, r1.z, r2.x, r2.y, r2.z, r3.x, r3.y, r3.z};
  return UnitQuaternion::from_matrix(m);
}

}  // namespace

std::vector<UnitQuaternion> sample_rotations(const ViewSampling& s) {
  if (s.n_views < 1 || s.n_inplane < 1)
    throw ConfigError("sampling counts must be positive");
  std::vector<UnitQuaternion> out;
  out.reserve(static_cast<size_t>(s.total()));
  for (int i = 0; i < s.n_views; ++i) {
    const UnitQuaternion base = look_at_rotation(fibonacci_point(i, s.n_views));
    for (int k = 0; k < s.n_inplane; ++k) {
      const double roll = 2.0 * std::numbers::pi * k / s.n_inplane;
      out.push_back(UnitQuaternion::from_axis_angle({0, 0, 1}, roll) * base);
    }
  }
  return out;
}

PoseCodebook build_codebook(const DeformableObject& object,
                            const CameraIntrinsics& k, const ViewSampling& s,
                            double view_distance, int threads) {
  s.validate();
  k.validate();
  if (!(view_distance > object.bounding_radius()))
    throw ConfigError("view_distance must exceed the object bounding radius");

  PoseCodebook cb;
  cb.sampling = s;
  cb.intrinsics = k;
  cb.crop = CropRule{};
  const std::vector<UnitQuaternion> rotations = sample_rotations(s);
  cb.entries.resize(rotations.size());

  std::mutex err_mutex;
  int err_index = -1;
  std::string err_what;
  parallel_for(0, static_cast<int>(rotations.size()), threads, [&](int i) {
    try {
      const RigidTransform pose{rotations[size_t(i)], {0, 0, view_distance}};
      const DepthImage img = render_depth(object, pose, k);
      const Silhouette sil = find_silhouette(img);
      const DepthImage crop = crop_silhouette(img, sil, cb.crop);
      cb.entries[size_t(i)] = {rotations[size_t(i)], embed(crop)};
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (err_index < 0 || i < err_index) {
        err_index = i;
        err_what = e.what();
      }
    }
  });
  if (err_index >= 0)
    throw EmptyRender("codebook entry " + std::to_string(err_index) + ": " +
                      err_what);
  return cb;
}

LookupResult lookup(const Embedding& query, const PoseCodebook& cb) {
  if (cb.entries.empty()) throw ConfigError("codebook is empty");
  LookupResult best;
  best.similarity = -2.0;
  for (int i = 0; i < static_cast<int>(cb.entries.size()); ++i) {
    const double sim = cosine_similarity(query, cb.entries[size_t(i)].embedding);
    if (sim > best.similarity) {
      best.similarity = sim;
      best.index = i;
      best.rotation = cb.entries[size_t(i)].rotation;
    }
  }
  return best;
}

RigidTransform estimate_pose(const DepthImage& scene_depth, double centroid_u,
                             double centroid_v, double centroid_depth,
                             const PoseCodebook& cb,
                             const CameraIntrinsics& k) {
  if (!(k == cb.intrinsics))
    throw ConfigError("intrinsics differ from the codebook build settings");
  const Silhouette sil = find_silhouette(scene_depth, centroid_u, centroid_v);
  const DepthImage crop = crop_silhouette(scene_depth, sil, cb.crop);
  const LookupResult hit = lookup(embed(crop), cb);
  return {hit.rotation, deproject(centroid_u, centroid_v, centroid_depth, k)};
}

double coverage_bound(const std::vector<UnitQuaternion>& rotations,
                      int n_samples, Rng& rng) {
  if (rotations.empty()) throw ConfigError("empty rotation set");
  std::vector<UnitQuaternion> samples;
  samples.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i)
    samples.push_back(UnitQuaternion::sample_uniform(rng));

  std::vector<double> nearest_absdot(samples.size(), 0.0);
  parallel_for(0, static_cast<int>(samples.size()), 0, [&](int i) {
    double best = 0.0;
    for (const auto& r : rotations)
      best = std::max(best, std::abs(samples[size_t(i)].dot(r)));
    nearest_absdot[size_t(i)] = best;
  });
  double worst = 1.0;
  for (double d : nearest_absdot) worst = std::min(worst, d);
  return 2.0 * std::acos(std::clamp(worst, 0.0, 1.0));
}

std::vector<std::string> codebook_header_lines(const PoseCodebook& cb) {
  std::vector<std::string> lines;
  char buf[96];
  lines.emplace_back("CODEBOOK v1");
  lines.push_back("dim " + std::to_string(cb.entries.empty()
                                              ? Embedding::kDim
                                              : cb.entries.front().embedding.dim()));
  lines.push_back("views " + std::to_string(cb.sampling.n_views) + " inplane " +
                  std::to_string(cb.sampling.n_inplane));
  std::snprintf(buf, sizeof(buf), "crop square %.12g %d", cb.crop.scale,
                cb.crop.size);
  lines.emplace_back(buf);
  std::snprintf(buf, sizeof(buf), "intrinsics %.12g %.12g %.12g %.12g %d %d",
                cb.intrinsics.fx, cb.intrinsics.fy, cb.intrinsics.cx,
                cb.intrinsics.cy, cb.intrinsics.width, cb.intrinsics.height);
  lines.emplace_back(buf);
  return lines;
}

void save_codebook(const std::string& path, const PoseCodebook& cb) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write codebook: " + path);
  char buf[64];
  for (const auto& line : codebook_header_lines(cb)) out << line << "\n";
  for (const auto& e : cb.entries) {
    out << format_quaternion(e.rotation);
    for (double v : e.embedding.values) {
      std::snprintf(buf, sizeof(buf), " %.12g", v);
      out << buf;
    }
    out << "\n";
  }
}

PoseCodebook load_codebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open codebook: " + path);
  std::string line, word, shape;
  PoseCodebook cb;
  int dim = 0;

  auto expect_line = [&](const char* what) {
    if (!std::getline(in, line))
      throw IoError(std::string("codebook header truncated at ") + what);
    return std::istringstream(line);
  };

  if (!std::getline(in, line) || line != "CODEBOOK v1")
    throw IoError("not a codebook file: " + path);
  {
    auto ss = expect_line("dim");
    if (!(ss >> word >> dim) || word != "dim" || dim <= 0)
      throw IoError("bad dim line");
  }
  {
    auto ss = expect_line("views");
    std::string w2;
    if (!(ss >> word >> cb.sampling.n_views >> w2 >> cb.sampling.n_inplane) ||
        word != "views" || w2 != "inplane")
      throw IoError("bad views line");
  }
  {
    auto ss = expect_line("crop");
    if (!(ss >> word >> shape >> cb.crop.scale >> cb.crop.size) ||
        word != "crop" || shape != "square")
      throw IoError("bad crop line");
  }
  {
    auto ss = expect_line("intrinsics");
    if (!(ss >> word >> cb.intrinsics.fx >> cb.intrinsics.fy >>
          cb.intrinsics.cx >> cb.intrinsics.cy >> cb.intrinsics.width >>
          cb.intrinsics.height) ||
        word != "intrinsics")
      throw IoError("bad intrinsics line");
  }

  const int n = cb.sampling.total();
  cb.entries.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw IoError("codebook truncated at entry " + std::to_string(i));
    std::istringstream ss(line);
    double w, x, y, z;
    if (!(ss >> w >> x >> y >> z))
      throw IoError("bad rotation at entry " + std::to_string(i));
    PoseCodebook::Entry e;
    e.rotation = UnitQuaternion::normalize(w, x, y, z);
    e.embedding.values.resize(static_cast<size_t>(dim));
    double n2 = 0.0;
    for (double& v : e.embedding.values) {
      if (!(ss >> v))
        throw IoError("bad embedding at entry " + std::to_string(i));
      n2 += v * v;
    }
    if (n2 > 1e-24) {
      const double inv = 1.0 / std::sqrt(n2);
      for (double& v : e.embedding.values) v *= inv;
    }
    cb.entries.push_back(std::move(e));
  }
  return cb;
}

}  // namespace binpick
