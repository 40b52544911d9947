#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spmf/error.hpp"

namespace spmf {

struct RgbPixel {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend constexpr bool operator==(RgbPixel, RgbPixel) = default;
};

// Real -> 8-bit channel. Half-up rounding, saturating at 0 and 255.
inline std::uint8_t to_channel(double v) {
  const double r = std::floor(v + 0.5);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

struct Provenance {
  std::string sequence_id;
  std::string stats_source;
  double d_max = 0.0;

  bool operator==(const Provenance&) const = default;
};

// Row-major RGB grid. Column x of an encoded image is one time step.
struct SpmfImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<RgbPixel> pixels;
  Provenance provenance;

  SpmfImage() = default;
  SpmfImage(std::size_t w, std::size_t h, RgbPixel fill = {}) : width(w), height(h), pixels(w * h, fill) {}

  bool empty() const noexcept { return width == 0 || height == 0; }
  RgbPixel& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const RgbPixel& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  bool same_pixels(const SpmfImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
  bool operator==(const SpmfImage&) const = default;
};

namespace detail {

inline std::uint8_t channel(RgbPixel p, int c) { return c == 0 ? p.r : (c == 1 ? p.g : p.b); }
inline void set_channel(RgbPixel& p, int c, std::uint8_t v) { (c == 0 ? p.r : (c == 1 ? p.g : p.b)) = v; }

// Source sample position for destination index `i` under pixel-center
// alignment, clamped to the valid range.
struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

inline Tap center_tap(std::size_t i, std::size_t src, std::size_t dst) {
  double s = (static_cast<double>(i) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(s));
  const std::size_t i1 = std::min(i0 + 1, src - 1);
  return {i0, i1, s - static_cast<double>(i0)};
}

}  // namespace detail

// Bilinear resampling with pixel-center alignment, per channel, half-up.
inline SpmfImage resize_image(const SpmfImage& img, std::size_t out_w = 32, std::size_t out_h = 32) {
  if (img.empty()) throw ArgumentError("resize_image: empty source image");
  if (out_w < 1 || out_h < 1) throw ArgumentError("resize_image: target dimensions must be >= 1");
  if (out_w == img.width && out_h == img.height) return img;

  std::vector<detail::Tap> xs(out_w), ys(out_h);
  for (std::size_t x = 0; x < out_w; ++x) xs[x] = detail::center_tap(x, img.width, out_w);
  for (std::size_t y = 0; y < out_h; ++y) ys[y] = detail::center_tap(y, img.height, out_h);

  SpmfImage out(out_w, out_h);
  out.provenance = img.provenance;
  for (std::size_t y = 0; y < out_h; ++y) {
    const auto& ty = ys[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const auto& tx = xs[x];
      const RgbPixel p00 = img.at(tx.i0, ty.i0), p10 = img.at(tx.i1, ty.i0);
      const RgbPixel p01 = img.at(tx.i0, ty.i1), p11 = img.at(tx.i1, ty.i1);
      RgbPixel& dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = detail::channel(p00, c) * (1.0 - tx.frac) + detail::channel(p10, c) * tx.frac;
        const double bottom = detail::channel(p01, c) * (1.0 - tx.frac) + detail::channel(p11, c) * tx.frac;
        detail::set_channel(dst, c, to_channel(top * (1.0 - ty.frac) + bottom * ty.frac));
      }
    }
  }
  return out;
}

}  // namespace spmf
