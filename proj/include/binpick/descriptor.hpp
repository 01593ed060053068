#pragma once

#include <vector>

#include "binpick/camera.hpp"
#include "binpick/rng.hpp"

namespace binpick {

// Unit-norm descriptor vector: 256 block-mean values + 128 gradient
// orientation histogram values.
struct Embedding {
  static constexpr int kBlockGrid = 16;    // 16x16 depth block means
  static constexpr int kCellGrid = 4;      // 4x4 spatial histogram cells
  static constexpr int kOrientBins = 8;
  static constexpr int kDim =
      kBlockGrid * kBlockGrid + kCellGrid * kCellGrid * kOrientBins;  // 384

  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Dot product of unit vectors. Throws DimensionMismatch.
double cosine_similarity(const Embedding& a, const Embedding& b);

// Depth-image descriptor standing in for a learned encoder. Deterministic:
//   (a) valid-pixel depths are normalized to zero mean / unit variance,
//   (b) 16x16 block means of the normalized depth (empty blocks = 0),
//   (c) Sobel gradient orientation histogram, 8 bins weighted by magnitude,
//       over a 4x4 spatial grid,
//   (d) concatenation, L2-normalized.
// Depth offsets and global depth scaling cancel in (a). Intended input is
// the standard 128x128 detection crop. Throws EmptyImage when fewer than
// 16 pixels are valid.
Embedding embed(const DepthImage& image);

struct AugmentationConfig {
  double translation_jitter = 4.0;  // max shift, pixels
  double scale_min = 0.95;          // multiplicative, min <= 1 <= max
  double scale_max = 1.05;
  int occlusion_patches = 2;
  int occlusion_max_side = 12;      // pixels
  double depth_noise_sigma = 0.005;  // meters, valid pixels only
  enum class Background { Zero, RandomPlane, RandomClutter };
  Background background = Background::Zero;

  void validate() const;  // ConfigError
};

// Applies, in order: integer translation jitter, scale about the image
// center (nearest neighbor), occlusion patches cleared to background,
// Gaussian depth noise on valid pixels, background fill. Deterministic for
// a fixed generator state.
DepthImage augment(const DepthImage& image, const AugmentationConfig& cfg,
                   Rng& rng);

const char* to_string(AugmentationConfig::Background mode);
AugmentationConfig::Background background_from_string(
    const std::string& name);  // ConfigError

}  // namespace binpick
