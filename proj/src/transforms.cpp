#include "binpick/transforms.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binpick/errors.hpp"

namespace binpick {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation,
          a.rotation.rotate(b.translation) + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  const UnitQuaternion rinv = t.rotation.inverse();
  return {rinv, -rinv.rotate(t.translation)};
}

RigidTransform calibrate_camera(const RigidTransform& t_base_wrist,
                                const RigidTransform& t_wrist_aruco,
                                const RigidTransform& t_aruco_camera) {
  return compose(compose(t_base_wrist, t_wrist_aruco), t_aruco_camera);
}

RigidTransform label_object_pose(const RigidTransform& t_base_camera,
                                 const RigidTransform& t_base_wrist,
                                 const RigidTransform& t_wrist_object) {
  return compose(compose(invert(t_base_camera), t_base_wrist),
                 t_wrist_object);
}

RigidTransform canonical_goal(const RigidTransform& /*t_base_object_now*/,
                              const RigidTransform& t_wrist_object,
                              const RigidTransform& t_base_object_canonical) {
  return compose(t_base_object_canonical, invert(t_wrist_object));
}

void TransformTree::add_edge(const FrameId& parent, const FrameId& child,
                             const RigidTransform& t) {
  if (parent.empty() || child.empty())
    throw ConfigError("frame names must be non-empty");
  if (parent == child) throw CycleDetected("self-edge on frame " + parent);
  auto it = nodes_.find(child);
  if (it != nodes_.end() && !it->second.parent.empty())
    throw DuplicateChild("frame already parented: " + child);
  // Adding parent->child closes a loop iff child is an ancestor of parent.
  for (auto cur = nodes_.find(parent); cur != nodes_.end();
       cur = nodes_.find(cur->second.parent)) {
    if (cur->first == child)
      throw CycleDetected("edge " + parent + "->" + child +
                          " would create a cycle");
    if (cur->second.parent.empty()) break;
  }
  nodes_.try_emplace(parent);
  nodes_[child] = Node{parent, t};
}

void TransformTree::replace_edge(const FrameId& parent, const FrameId& child,
                                 const RigidTransform& t) {
  auto it = nodes_.find(child);
  if (it == nodes_.end() || it->second.parent != parent)
    throw UnknownFrame("no edge " + parent + "->" + child);
  it->second.from_parent = t;
}

bool TransformTree::has_frame(const FrameId& name) const {
  return nodes_.count(name) > 0;
}

std::pair<FrameId, RigidTransform> TransformTree::to_root(
    const FrameId& frame) const {
  FrameId cur = frame;
  RigidTransform t = RigidTransform::identity();  // T^cur_frame
  for (;;) {
    const auto it = nodes_.find(cur);
    if (it == nodes_.end() || it->second.parent.empty()) return {cur, t};
    t = compose(it->second.from_parent, t);
    cur = it->second.parent;
  }
}

RigidTransform TransformTree::lookup(const FrameId& from,
                                     const FrameId& to) const {
  if (!has_frame(from)) throw UnknownFrame("unknown frame: " + from);
  if (!has_frame(to)) throw UnknownFrame("unknown frame: " + to);
  if (from == to) return RigidTransform::identity();
  const auto [root_a, t_root_from] = to_root(from);
  const auto [root_b, t_root_to] = to_root(to);
  if (root_a != root_b)
    throw Disconnected("frames " + from + " and " + to +
                       " are in different trees");
  return compose(invert(t_root_from), t_root_to);
}

std::vector<FrameId> TransformTree::frames() const {
  std::vector<FrameId> out;
  out.reserve(nodes_.size());
  for (const auto& [name, node] : nodes_) out.push_back(name);
  return out;
}

std::string format_transform_line(const NamedTransform& nt) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %s %.12g %.12g %.12g %.12g %.12g %.12g %.12g",
                nt.parent.c_str(), nt.child.c_str(), nt.t.rotation.w(),
                nt.t.rotation.x(), nt.t.rotation.y(), nt.t.rotation.z(),
                nt.t.translation.x, nt.t.translation.y, nt.t.translation.z);
  return buf;
}

NamedTransform parse_transform_line(const std::string& line) {
  std::istringstream in(line);
  NamedTransform nt;
  double w, x, y, z;
  if (!(in >> nt.parent >> nt.child >> w >> x >> y >> z >>
        nt.t.translation.x >> nt.t.translation.y >> nt.t.translation.z))
    throw IoError("bad transform line: " + line);
  nt.t.rotation = UnitQuaternion::normalize(w, x, y, z);
  return nt;
}

std::vector<NamedTransform> load_transform_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transform file: " + path);
  std::vector<NamedTransform> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    edges.push_back(parse_transform_line(line));
  }
  return edges;
}

void save_transform_file(const std::string& path,
                         const std::vector<NamedTransform>& edges) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transform file: " + path);
  for (const auto& e : edges) out << format_transform_line(e) << "\n";
}

}  // namespace binpick
