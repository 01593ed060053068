#pragma once

#include "binpick/deformable_object.hpp"
#include "binpick/transforms.hpp"

namespace binpick {

struct CameraIntrinsics;

inline constexpr int kRaycastMarchSteps = 64;

// First intersection parameter t of the ray origin + t*dir (dir unit length)
// with the posed object, or a negative value when the ray misses.
// Coarse march over the bounding-sphere interval, then bisection to 1e-6 m.
double raycast(const DeformableObject& object, const RigidTransform& pose,
               const Vec3& origin, const Vec3& dir);

struct PixelRect {
  int u0 = 0, v0 = 0, u1 = -1, v1 = -1;
};

// Conservative image-space bounds of a sphere (center, radius); full image
// when the sphere reaches behind the camera.
PixelRect project_bounding_rect(const Vec3& center, double radius,
                                const CameraIntrinsics& k);

}  // namespace binpick
