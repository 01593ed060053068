#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binpick/deformable_object.hpp"
#include "binpick/transforms.hpp"

namespace binpick {

// Pinhole model, no distortion. Camera frame: +z along the optical axis,
// +x right, +y down. Pixel (u, v) maps to the ray through
// ((u - cx)/fx, (v - cy)/fy, 1); no half-pixel offset.
struct CameraIntrinsics {
  double fx = 128.0;
  double fy = 128.0;
  double cx = 64.0;
  double cy = 64.0;
  int width = 128;
  int height = 128;

  static CameraIntrinsics desk_default() { return {}; }
  void validate() const;  // ConfigError
  bool operator==(const CameraIntrinsics&) const = default;
};

// Row-major depth map in meters; 0 means no return.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(size_t(w) * h, 0.0) {}

  double& at(int u, int v) { return data[size_t(v) * width + u]; }
  double at(int u, int v) const { return data[size_t(v) * width + u]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
  bool valid(int u, int v) const { return at(u, v) > 0.0; }
  int count_valid() const;
};

// Row-major 8-bit RGB, 3 channels per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(size_t(3) * w * h, 0) {}
  std::uint8_t* at(int u, int v) { return &data[3 * (size_t(v) * width + u)]; }
};

// Pixel + depth -> camera-frame point ((u-cx)d/fx, (v-cy)d/fy, d).
// Throws InvalidDepth (depth <= 0) or OutOfBounds (pixel outside image).
Vec3 deproject(double u, double v, double depth, const CameraIntrinsics& k);

// Camera-frame point -> pixel. Throws BehindCamera when z <= 0.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};
Pixel project(const Vec3& point, const CameraIntrinsics& k);

// Ray-cast depth render of one object at the given camera-frame pose.
// Depth is the z coordinate of the hit point (distance along the optical
// axis); background pixels stay 0. Deterministic: per-ray 64-step march over
// the bounding-sphere interval, then bisection to 1e-6 m.
// Throws EmptyRender when no pixel hits.
DepthImage render_depth(const DeformableObject& object,
                        const RigidTransform& pose,
                        const CameraIntrinsics& k);

// Connected patch of valid pixels (4-connectivity).
struct Silhouette {
  double centroid_u = 0.0;
  double centroid_v = 0.0;
  int min_u = 0, min_v = 0, max_u = 0, max_v = 0;
  int pixel_count = 0;
  double depth_at_centroid = 0.0;  // depth at the valid pixel nearest to the centroid
};

// Silhouette of the component containing the valid pixel nearest to
// (seed_u, seed_v). Throws EmptyImage when the image has no valid pixel.
Silhouette find_silhouette(const DepthImage& img, double seed_u,
                           double seed_v);
// Convenience: seeded at the centroid of all valid pixels.
Silhouette find_silhouette(const DepthImage& img);

// Square detection crop: centered on the silhouette centroid, side =
// scale * max bbox side, nearest-neighbor resampled to size x size.
struct CropRule {
  double scale = 1.3;
  int size = 128;
  bool operator==(const CropRule&) const = default;
};
DepthImage crop_silhouette(const DepthImage& img, const Silhouette& s,
                           const CropRule& rule);

// Text serialization: header "DEPTH width height", then width*height
// decimal meters, row-major.
void save_depth_text(const std::string& path, const DepthImage& img);
DepthImage load_depth_text(const std::string& path);  // IoError

// Binary PPM (P6).
void save_ppm(const std::string& path, const RgbImage& img);
// Grayscale visualization of a depth map (near = bright).
RgbImage depth_to_rgb(const DepthImage& img);

}  // namespace binpick
