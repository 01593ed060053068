#pragma once

#include <string>
#include <vector>

#include "binpick/camera.hpp"
#include "binpick/descriptor.hpp"

namespace binpick {

// View-sphere sampling density: n_views viewpoints on the unit sphere, each
// with n_inplane evenly spaced in-plane rolls.
struct ViewSampling {
  int n_views = 162;
  int n_inplane = 12;

  int total() const { return n_views * n_inplane; }
  void validate() const;  // ConfigError: n_views >= 4, n_inplane >= 1
};

// Deterministic rotation set covering the view sphere: Fibonacci lattice
// viewpoints (lattice axis +y; the two pole points are nudged by 1e-3 rad so
// the up-vector cross products stay well defined), each turned into a
// look-at rotation with global +y up and composed with n_inplane rolls about
// the optical axis. Order is viewpoint-major, roll-minor. Accepts n_views
// >= 1; ViewSampling::validate() gates codebook-sized use.
std::vector<UnitQuaternion> sample_rotations(const ViewSampling& s);

// Dictionary of (rotation, embedding) pairs over the sampled views.
struct PoseCodebook {
  struct Entry {
    UnitQuaternion rotation;  // rotation part of T^camera_object
    Embedding embedding;
  };

  ViewSampling sampling;
  CropRule crop;
  CameraIntrinsics intrinsics;
  std::vector<Entry> entries;
};

// Renders the object at (0, 0, view_distance) in every sampled rotation,
// crops per the detection rule, embeds, and stores entries in sampling
// order (independent of execution order). threads = 0 picks the hardware
// count. Throws EmptyRender/EmptyImage tagged with the offending index.
PoseCodebook build_codebook(const DeformableObject& object,
                            const CameraIntrinsics& k, const ViewSampling& s,
                            double view_distance, int threads = 0);

struct LookupResult {
  UnitQuaternion rotation;
  double similarity = 0.0;
  int index = -1;
};

// Exhaustive nearest-neighbor scan by cosine similarity; ties resolve to the
// lowest index. Throws DimensionMismatch.
LookupResult lookup(const Embedding& query, const PoseCodebook& cb);

// Full pose from one detection: rotation from the codebook lookup of the
// detection crop, translation from deprojecting the detection centroid.
// Returns T^camera_object. Throws ConfigError when the intrinsics disagree
// with the codebook's build intrinsics.
RigidTransform estimate_pose(const DepthImage& scene_depth, double centroid_u,
                             double centroid_v, double centroid_depth,
                             const PoseCodebook& cb,
                             const CameraIntrinsics& k);

// Discretization bound: max over n_samples random rotations of the geodesic
// distance to the nearest sampled rotation.
double coverage_bound(const std::vector<UnitQuaternion>& rotations,
                      int n_samples, Rng& rng);

// Text format, bit-reproducible for identical config:
//   CODEBOOK v1 / dim D / views N inplane M / crop square <scale> <size> /
//   intrinsics fx fy cx cy w h / one "w x y z e1..eD" line per entry.
std::vector<std::string> codebook_header_lines(const PoseCodebook& cb);
void save_codebook(const std::string& path, const PoseCodebook& cb);
PoseCodebook load_codebook(const std::string& path);  // IoError

}  // namespace binpick
