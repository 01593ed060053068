#pragma once

#include <array>
#include <string>
#include <vector>

#include "binpick/camera.hpp"
#include "binpick/deformable_object.hpp"
#include "binpick/transforms.hpp"

namespace binpick {

// Object-local frame convention: +x tail-to-neck, +z out of the breast.
// The camera looks +z down into the bin, so BreastUp means the breast axis
// maps near (0, 0, -1) in the camera frame.
enum class PoseClass { BreastUp, BreastDown, BreastSide };

const char* to_string(PoseClass c);
PoseClass pose_class_from_string(const std::string& name);  // ConfigError

// Class of an orientation by its breast-axis direction; the axis always lies
// within 45 degrees of one class's nominal alignment.
PoseClass classify_pose(const UnitQuaternion& orientation);

struct SceneObject {
  DeformableObject::Params shape;
  RigidTransform pose;  // T^camera_object
  PoseClass pose_class = PoseClass::BreastUp;
};

struct BinScene {
  std::vector<SceneObject> objects;
  Vec3 bin_min{-0.34, -0.28, 0.45};
  Vec3 bin_max{0.34, 0.28, 0.75};  // floor plane at z = bin_max.z
};

// Bird-shaped default: asymmetric body with neck, tail and two back wings.
DeformableObject::Params default_bird_params();

struct SceneConfig {
  Vec3 bin_min{-0.34, -0.28, 0.45};
  Vec3 bin_max{0.34, 0.28, 0.75};
  double max_perturbation = 0.5235987755982988;  // 30 deg tilt off nominal
  bool vary_shape = true;      // per-object axis jitter, fresh deform seeds
  bool protrusions = true;     // idealized runs drop wings/neck/tail
  double deform_amplitude = 0.12;
  DeformableObject::Params base_shape = default_bird_params();
};

// n objects with fresh deformation seeds, class-conditioned orientations
// (full yaw, tilt <= max_perturbation) and rejection-sampled positions with
// at most 1 cm bounding-sphere penetration. Throws PlacementFailed after
// 1000 rejections.
BinScene generate_scene(int n, const std::array<double, 3>& class_mix,
                        const SceneConfig& cfg, Rng& rng);

struct SceneRender {
  DepthImage depth;
  std::vector<int> object_ids;  // row-major, -1 = background

  int id_at(int u, int v) const { return object_ids[size_t(v) * depth.width + u]; }
};
SceneRender render_scene(const BinScene& scene, const CameraIntrinsics& k);

struct SuctionModel {
  double cup_radius = 0.02;          // meters
  double flatness_threshold = 0.5;   // max normal-cone half-angle, radians
  double v0 = 5.0;                   // voltage curve v(g) = v0 / (1 + k*g)
  double k = 50.0;                   // 1/meters
  double v_threshold = 4.5;          // seal voltage
  double slip_margin = 0.8;          // lift holds iff half-angle <= margin*flatness
  double clearance = 0.005;          // allowed intrusion above contact plane, m
  double descent_start_gap = 0.05;   // m
  double descent_step = 0.001;       // m

  void validate() const;  // ConfigError
};

struct Keypoint {
  int u = 0;
  int v = 0;
  double score = 0.0;       // 1 / (1 + normal-cone half-angle)
  double half_angle = 0.0;
  Vec3 point;               // deprojected, camera frame
};

// Geometric picking-point oracle: stride-4 candidate grid; per candidate the
// cup-radius pixel disc is deprojected and a plane fitted; score favors
// small normal-cone half-angles. Candidates whose disc leaves the image,
// touches invalid pixels, or contains an adjacent-pixel depth jump > 2 cm
// are excluded. Ranked by score, ties in raster order.
// Throws NoCandidates when nothing qualifies.
std::vector<Keypoint> detect_keypoints(const DepthImage& scene_depth,
                                       const CameraIntrinsics& k,
                                       const SuctionModel& cup);

enum class PickFailure { None, NotFlat, Obstructed, Slipped };
const char* to_string(PickFailure f);

struct DescentResult {
  std::vector<double> voltage_trace;  // one value per 1 mm step until seal
  bool seal = false;
  PickFailure cause = PickFailure::None;
  double contact_half_angle = 0.0;
  int object_id = -1;   // object owning the contact point
  Vec3 contact_point;   // camera frame
};

// Lowers the cup along +z above the keypoint, tracking v = v0/(1 + k*gap)
// until it crosses the threshold, then checks the contact: the patch
// normal-cone half-angle must stay within the flatness threshold and no
// surface may rise more than `clearance` above the contact plane inside the
// cup cylinder. Failure is a result, not an error.
DescentResult simulate_descent(const BinScene& scene, const Vec3& keypoint,
                               const SuctionModel& cup);

struct PickAttempt {
  Keypoint keypoint;
  bool seal = false;
  bool success = false;
  PickFailure cause = PickFailure::None;
  int object_id = -1;
  double contact_half_angle = 0.0;
  std::vector<double> voltage_trace;
};

// Attempts the top-ranked keypoint. On seal the lift holds only while the
// contact half-angle stays within slip_margin * flatness_threshold; a held
// object is removed from the scene and parented to the "cup" frame. The
// tree must contain base->camera, base->wrist and wrist->cup.
// Throws NoCandidates on an empty keypoint list.
PickAttempt execute_pick(BinScene& scene, TransformTree& tree,
                         const std::vector<Keypoint>& ranked,
                         const SuctionModel& cup);

struct PlacementResult {
  RigidTransform estimated;        // estimate the goal was computed from
  RigidTransform final_true_pose;  // true object pose after the move
  double geodesic_error = 0.0;     // radians, vs canonical orientation
  bool success = false;
};

// Commands the wrist goal derived from the ESTIMATED pose, then moves the
// TRUE grasp rigidly with it: the final orientation error equals the
// estimation error exactly. All poses in the base frame.
PlacementResult evaluate_placement(const RigidTransform& estimated,
                                   const RigidTransform& true_pose,
                                   const RigidTransform& t_wrist_object_true,
                                   const RigidTransform& canonical,
                                   double tolerance);

// Structured scene text: bin bounds, per-object shape/seed/class, poses in
// the shared transform-line format.
void save_scene(const std::string& path, const BinScene& scene);
BinScene load_scene(const std::string& path);  // IoError

}  // namespace binpick
