#pragma once

#include <map>
#include <string>
#include <vector>

#include "binpick/rotations.hpp"

namespace binpick {

// SE(3) rigid transform T^parent_child: maps points expressed in the child
// frame into the parent frame. Translation in meters.
struct RigidTransform {
  UnitQuaternion rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

// Camera extrinsic chain:
//   T^base_camera = T^base_wrist * T^wrist_aruco * T^aruco_camera
RigidTransform calibrate_camera(const RigidTransform& t_base_wrist,
                                const RigidTransform& t_wrist_aruco,
                                const RigidTransform& t_aruco_camera);

// Automatic pose-label chain:
//   T^camera_object = (T^base_camera)^-1 * T^base_wrist * T^wrist_object
RigidTransform label_object_pose(const RigidTransform& t_base_camera,
                                 const RigidTransform& t_base_wrist,
                                 const RigidTransform& t_wrist_object);

// Wrist goal that carries a grasped object onto a target pose:
//   goal = t_base_object_canonical * invert(t_wrist_object),
// so compose(goal, t_wrist_object) == t_base_object_canonical.
RigidTransform canonical_goal(const RigidTransform& t_base_object_now,
                              const RigidTransform& t_wrist_object,
                              const RigidTransform& t_base_object_canonical);

using FrameId = std::string;

// Forest of named frames. Each child has at most one parent; lookup composes
// along the unique path, inverting edges traversed child-to-parent.
class TransformTree {
 public:
  // Throws DuplicateChild when the child is already parented, CycleDetected
  // when the edge would close a loop, ConfigError on empty names.
  void add_edge(const FrameId& parent, const FrameId& child,
                const RigidTransform& t);

  // Updates the transform of an existing edge (re-grasp support).
  // Throws UnknownFrame when the edge does not exist.
  void replace_edge(const FrameId& parent, const FrameId& child,
                    const RigidTransform& t);

  bool has_frame(const FrameId& name) const;

  // T^from_to. Throws UnknownFrame or Disconnected.
  RigidTransform lookup(const FrameId& from, const FrameId& to) const;

  std::vector<FrameId> frames() const;

 private:
  struct Node {
    FrameId parent;            // empty for roots
    RigidTransform from_parent;  // T^parent_this
  };
  // Returns (root id, T^root_frame).
  std::pair<FrameId, RigidTransform> to_root(const FrameId& frame) const;

  std::map<FrameId, Node> nodes_;
};

// One edge in the text format "parent child w x y z tx ty tz".
struct NamedTransform {
  FrameId parent;
  FrameId child;
  RigidTransform t;
};

std::string format_transform_line(const NamedTransform& nt);
NamedTransform parse_transform_line(const std::string& line);  // IoError
std::vector<NamedTransform> load_transform_file(const std::string& path);
void save_transform_file(const std::string& path,
                         const std::vector<NamedTransform>& edges);

}  // namespace binpick
