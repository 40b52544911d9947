#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spmf/error.hpp"
#include "spmf/image.hpp"
#include "spmf/rng.hpp"

namespace spmf {

struct AugmentConfig {
  double crop_fraction = 0.9;
  double flip_probability = 0.5;
  double gaussian_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) throw ArgumentError("AugmentConfig: crop_fraction must be in (0,1]");
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
      throw ArgumentError("AugmentConfig: flip_probability must be in [0,1]");
    }
    if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) {
      throw ArgumentError("AugmentConfig: gaussian_sigma must be >= 0");
    }
  }
};

// Sub-rectangle [x0, x0+w) x [y0, y0+h).
inline SpmfImage crop(const SpmfImage& img, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  if (w < 1 || h < 1 || x0 + w > img.width || y0 + h > img.height) {
    throw ArgumentError("crop: rectangle outside the image");
  }
  SpmfImage out(w, h);
  out.provenance = img.provenance;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  }
  return out;
}

inline std::size_t crop_extent(std::size_t full, double fraction) {
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(full)));
  return std::clamp<std::size_t>(n, 1, full);
}

// Crop ceil(f*W) x ceil(f*H) at a uniform offset, then resize back to W x H.
inline SpmfImage random_crop(const SpmfImage& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  if (img.empty()) throw ArgumentError("random_crop: empty image");
  const std::size_t cw = crop_extent(img.width, cfg.crop_fraction);
  const std::size_t ch = crop_extent(img.height, cfg.crop_fraction);
  const std::size_t ox = rng.below(img.width - cw + 1);
  const std::size_t oy = rng.below(img.height - ch + 1);
  return resize_image(crop(img, ox, oy, cw, ch), img.width, img.height);
}

// Mirror along x. On an encoded image this reverses time.
inline SpmfImage flip_horizontal(const SpmfImage& img) {
  SpmfImage out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) out.at(img.width - 1 - x, y) = img.at(x, y);
  }
  return out;
}

// Normalized 1-D Gaussian taps for offsets -r..r, r = ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + r)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// Separable blur, clamp-to-edge. The intermediate pass stays in double; one
// rounding at the end.
inline SpmfImage gaussian_blur(const SpmfImage& img, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("gaussian_blur: sigma must be >= 0");
  if (sigma == 0.0 || img.empty()) return img;
  const auto k = gaussian_kernel(sigma);
  const auto r = static_cast<std::ptrdiff_t>(k.size() / 2);
  const auto W = static_cast<std::ptrdiff_t>(img.width), H = static_cast<std::ptrdiff_t>(img.height);

  std::vector<double> tmp(img.width * img.height * 3, 0.0);
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      double acc[3] = {0, 0, 0};
      for (std::ptrdiff_t i = -r; i <= r; ++i) {
        const RgbPixel p = img.at(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x + i, 0, W - 1)),
                                  static_cast<std::size_t>(y));
        const double w = k[static_cast<std::size_t>(i + r)];
        acc[0] += w * p.r;
        acc[1] += w * p.g;
        acc[2] += w * p.b;
      }
      double* dst = &tmp[static_cast<std::size_t>(y * W + x) * 3];
      dst[0] = acc[0];
      dst[1] = acc[1];
      dst[2] = acc[2];
    }
  }
  SpmfImage out(img.width, img.height);
  out.provenance = img.provenance;
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      double acc[3] = {0, 0, 0};
      for (std::ptrdiff_t i = -r; i <= r; ++i) {
        const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + i, 0, H - 1);
        const double* src = &tmp[static_cast<std::size_t>(yy * W + x) * 3];
        const double w = k[static_cast<std::size_t>(i + r)];
        acc[0] += w * src[0];
        acc[1] += w * src[1];
        acc[2] += w * src[2];
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = {to_channel(acc[0]), to_channel(acc[1]),
                                                                          to_channel(acc[2])};
    }
  }
  return out;
}

// Crop, then flip with probability p, then blur. The rng is consumed in
// that order (two offset draws, one flip draw) whatever the outcomes.
inline SpmfImage augment_image(const SpmfImage& img, const AugmentConfig& cfg, Rng& rng) {
  SpmfImage out = random_crop(img, cfg, rng);
  if (rng.bernoulli(cfg.flip_probability)) out = flip_horizontal(out);
  return gaussian_blur(out, cfg.gaussian_sigma);
}

}  // namespace spmf
