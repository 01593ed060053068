#include "binpick/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binpick/errors.hpp"

namespace binpick {

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("embedding dimensions differ: " +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

Embedding embed(const DepthImage& img) {
  const int w = img.width, h = img.height;
  int n_valid = 0;
  double sum = 0.0;
  for (double d : img.data)
    if (d > 0) {
      ++n_valid;
      sum += d;
    }
  if (n_valid < 16)
    throw EmptyImage("need at least 16 valid pixels, got " +
                     std::to_string(n_valid));
  const double mean = sum / n_valid;
  double var = 0.0;
  for (double d : img.data)
    if (d > 0) var += (d - mean) * (d - mean);
  var /= n_valid;
  const double inv_std = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;

  // Normalized depth on the full grid; invalid pixels sit at 0 = the valid
  // mean, so silhouette edges still produce gradients.
  std::vector<double> norm(img.data.size(), 0.0);
  for (size_t i = 0; i < img.data.size(); ++i)
    if (img.data[i] > 0) norm[i] = (img.data[i] - mean) * inv_std;

  Embedding e;
  e.values.assign(Embedding::kDim, 0.0);

  // (b) block means over valid pixels.
  constexpr int bg = Embedding::kBlockGrid;
  std::array<double, bg * bg> block_sum{};
  std::array<int, bg * bg> block_count{};
  for (int v = 0; v < h; ++v) {
    const int bv = std::min(v * bg / h, bg - 1);
    for (int u = 0; u < w; ++u) {
      if (!img.valid(u, v)) continue;
      const int bu = std::min(u * bg / w, bg - 1);
      block_sum[bv * bg + bu] += norm[size_t(v) * w + u];
      block_count[bv * bg + bu] += 1;
    }
  }
  for (int i = 0; i < bg * bg; ++i)
    if (block_count[i] > 0) e.values[i] = block_sum[i] / block_count[i];

  // (c) Sobel orientation histogram, magnitude weighted.
  constexpr int cg = Embedding::kCellGrid;
  constexpr int bins = Embedding::kOrientBins;
  const int hist_base = bg * bg;
  auto at = [&](int u, int v) { return norm[size_t(v) * w + u]; };
  for (int v = 1; v + 1 < h; ++v) {
    const int cv = std::min(v * cg / h, cg - 1);
    for (int u = 1; u + 1 < w; ++u) {
      const double gx = (at(u + 1, v - 1) + 2 * at(u + 1, v) + at(u + 1, v + 1) -
                         at(u - 1, v - 1) - 2 * at(u - 1, v) - at(u - 1, v + 1));
      const double gy = (at(u - 1, v + 1) + 2 * at(u, v + 1) + at(u + 1, v + 1) -
                         at(u - 1, v - 1) - 2 * at(u, v - 1) - at(u + 1, v - 1));
      const double mag = std::hypot(gx, gy);
      if (mag <= 0) continue;
      const double ang = std::atan2(gy, gx);  // (-pi, pi]
      int bin = static_cast<int>((ang + std::numbers::pi) /
                                 (2 * std::numbers::pi) * bins);
      bin = std::clamp(bin, 0, bins - 1);
      const int cu = std::min(u * cg / w, cg - 1);
      e.values[hist_base + (cv * cg + cu) * bins + bin] += mag;
    }
  }

  // (d) L2 normalization; a featureless image maps to the canonical axis.
  double n2 = 0.0;
  for (double x : e.values) n2 += x * x;
  if (n2 > 1e-24) {
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : e.values) x *= inv;
  } else {
    e.values[0] = 1.0;
  }
  return e;
}

void AugmentationConfig::validate() const {
  if (!(translation_jitter >= 0)) throw ConfigError("translation_jitter < 0");
  if (!(scale_min <= 1.0 && 1.0 <= scale_max && scale_min > 0))
    throw ConfigError("scale range must satisfy 0 < min <= 1 <= max");
  if (occlusion_patches < 0) throw ConfigError("occlusion_patches < 0");
  if (occlusion_max_side < 0) throw ConfigError("occlusion_max_side < 0");
  if (!(depth_noise_sigma >= 0)) throw ConfigError("depth_noise_sigma < 0");
}

namespace {

DepthImage translate(const DepthImage& in, int dx, int dy) {
  DepthImage out(in.width, in.height);
  for (int v = 0; v < in.height; ++v)
    for (int u = 0; u < in.width; ++u) {
      const int su = u - dx, sv = v - dy;
      if (in.in_bounds(su, sv)) out.at(u, v) = in.at(su, sv);
    }
  return out;
}

DepthImage rescale(const DepthImage& in, double s) {
  DepthImage out(in.width, in.height);
  const double cx = in.width / 2.0, cy = in.height / 2.0;
  for (int v = 0; v < in.height; ++v)
    for (int u = 0; u < in.width; ++u) {
      const int su = static_cast<int>(std::lround(cx + (u - cx) / s));
      const int sv = static_cast<int>(std::lround(cy + (v - cy) / s));
      if (in.in_bounds(su, sv)) out.at(u, v) = in.at(su, sv);
    }
  return out;
}

}  // namespace

DepthImage augment(const DepthImage& image, const AugmentationConfig& cfg,
                   Rng& rng) {
  cfg.validate();
  const int jitter = static_cast<int>(std::lround(cfg.translation_jitter));
  const int dx = static_cast<int>(rng.uniform_int(-jitter, jitter));
  const int dy = static_cast<int>(rng.uniform_int(-jitter, jitter));
  DepthImage out = translate(image, dx, dy);

  const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
  out = rescale(out, s);

  for (int p = 0; p < cfg.occlusion_patches; ++p) {
    const int side =
        static_cast<int>(rng.uniform_int(1, std::max(1, cfg.occlusion_max_side)));
    const int u0 = static_cast<int>(rng.uniform_int(0, std::max(0, out.width - side)));
    const int v0 = static_cast<int>(rng.uniform_int(0, std::max(0, out.height - side)));
    for (int v = v0; v < std::min(out.height, v0 + side); ++v)
      for (int u = u0; u < std::min(out.width, u0 + side); ++u)
        out.at(u, v) = 0.0;
  }

  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(u, v))
        out.at(u, v) = std::max(
            0.0, out.at(u, v) + cfg.depth_noise_sigma * rng.normal());

  switch (cfg.background) {
    case AugmentationConfig::Background::Zero:
      break;
    case AugmentationConfig::Background::RandomPlane: {
      const double d0 = rng.uniform(0.4, 1.2);
      const double gu = rng.uniform(-0.002, 0.002);
      const double gv = rng.uniform(-0.002, 0.002);
      for (int v = 0; v < out.height; ++v)
        for (int u = 0; u < out.width; ++u)
          if (!out.valid(u, v))
            out.at(u, v) = std::max(
                0.05, d0 + gu * (u - out.width / 2.0) + gv * (v - out.height / 2.0));
      break;
    }
    case AugmentationConfig::Background::RandomClutter: {
      const double d0 = rng.uniform(0.6, 1.2);
      struct Blob {
        double u, v, r, d;
      };
      std::vector<Blob> blobs(static_cast<size_t>(rng.uniform_int(3, 8)));
      for (auto& b : blobs) {
        b.u = rng.uniform(0, out.width);
        b.v = rng.uniform(0, out.height);
        b.r = rng.uniform(0.05 * out.width, 0.25 * out.width);
        b.d = rng.uniform(0.3, d0);
      }
      for (int v = 0; v < out.height; ++v)
        for (int u = 0; u < out.width; ++u) {
          if (out.valid(u, v)) continue;
          double d = d0;
          for (const auto& b : blobs) {
            const double rr = (u - b.u) * (u - b.u) + (v - b.v) * (v - b.v);
            if (rr < b.r * b.r) d = std::min(d, b.d);
          }
          out.at(u, v) = d;
        }
      break;
    }
  }
  return out;
}

const char* to_string(AugmentationConfig::Background mode) {
  switch (mode) {
    case AugmentationConfig::Background::Zero: return "zero";
    case AugmentationConfig::Background::RandomPlane: return "random-plane";
    case AugmentationConfig::Background::RandomClutter: return "random-clutter";
  }
  return "zero";
}

AugmentationConfig::Background background_from_string(const std::string& name) {
  if (name == "zero") return AugmentationConfig::Background::Zero;
  if (name == "random-plane") return AugmentationConfig::Background::RandomPlane;
  if (name == "random-clutter") return AugmentationConfig::Background::RandomClutter;
  throw ConfigError("unknown background mode: " + name);
}

}  // namespace binpick
