#pragma once

// Skeleton sequence -> color image. Each frame contributes a pose column
// (within-frame joint-pair distances and orientations), each consecutive
// frame pair a motion column (cross-frame pairs); the columns alternate in
// time order, so an N-frame sequence becomes a (2N-1)-wide image.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spmf/error.hpp"
#include "spmf/image.hpp"
#include "spmf/ingest.hpp"
#include "spmf/skeleton.hpp"

namespace spmf {

// Corpus-wide distance range used to map joint distances into [0,1].
struct DistanceStats {
  double d_min = 0.0;
  double d_max = 0.0;
  std::string source;          // corpus identifier
  std::string scope = "whole";  // "whole" or "train"
  std::size_t sequences = 0;   // how many sequences contributed

  void validate() const {
    if (d_min != 0.0) throw StatsError("DistanceStats: d_min must be 0");
    if (!(d_max > 0.0) || !std::isfinite(d_max)) {
      throw StatsError("DistanceStats: d_max must be finite and > 0 (got " + detail::format_double(d_max) + ")");
    }
  }

  bool operator==(const DistanceStats&) const = default;
};

inline std::string to_record(const DistanceStats& s) {
  std::string out = "spmf-distance-stats 1\n";
  out += "d_min " + detail::format_double(s.d_min) + '\n';
  out += "d_max " + detail::format_double(s.d_max) + '\n';
  out += "source " + (s.source.empty() ? std::string("-") : s.source) + '\n';
  out += "scope " + s.scope + '\n';
  out += "sequences " + std::to_string(s.sequences) + '\n';
  return out;
}

inline DistanceStats parse_stats_record(std::string_view text) {
  detail::LineReader reader(text);
  auto header = reader.next();
  if (!header || header->tokens.size() != 2 || header->tokens[0] != "spmf-distance-stats" ||
      header->tokens[1] != "1") {
    throw StatsError("stats record: missing 'spmf-distance-stats 1' header");
  }
  DistanceStats s;
  bool have_max = false;
  while (auto line = reader.next()) {
    if (line->tokens.size() != 2) throw StatsError("stats record: malformed line " + std::to_string(line->number));
    const auto key = line->tokens[0];
    const auto val = line->tokens[1];
    if (key == "d_min" || key == "d_max") {
      auto v = detail::to_double(val);
      if (!v) throw StatsError("stats record: bad number on line " + std::to_string(line->number));
      (key == "d_min" ? s.d_min : s.d_max) = *v;
      have_max = have_max || key == "d_max";
    } else if (key == "source") {
      s.source = val == "-" ? std::string() : std::string(val);
    } else if (key == "scope") {
      s.scope = std::string(val);
    } else if (key == "sequences") {
      auto v = detail::to_integer(val);
      if (!v || *v < 0) throw StatsError("stats record: bad count on line " + std::to_string(line->number));
      s.sequences = static_cast<std::size_t>(*v);
    }
  }
  if (!have_max) throw StatsError("stats record: missing d_max");
  s.validate();
  return s;
}

// ----------------------------------------------------------- pair geometry

// Euclidean joint-joint distance. Exactly symmetric.
inline double jjd(Joint3 a, Joint3 b) { return norm(a - b); }

// Unit vector along a - b. nullopt for coincident joints: such pairs carry
// no orientation and are dropped from the column.
inline std::optional<Vec3> jjo(Joint3 a, Joint3 b) {
  const Vec3 d = a - b;
  if (d == Vec3{}) return std::nullopt;
  const double n = norm(d);
  if (n > 1e-150 && n < 1e150) return d / n;
  // Squared components would underflow or overflow; rescale first.
  const double m = std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
  if (!(m > 0.0) || !std::isfinite(m)) return std::nullopt;
  const Vec3 s = d / m;
  return s / norm(s);
}

// Cross-frame variants: `a` is joint j at frame t, `b` is joint k at t+1.
inline double cross_jjd(Joint3 a_t, Joint3 b_t1) { return jjd(a_t, b_t1); }
inline std::optional<Vec3> cross_jjo(Joint3 a_t, Joint3 b_t1) { return jjo(a_t, b_t1); }

// -------------------------------------------------------------- colorizing

inline double normalize_distance(double d, const DistanceStats& stats) {
  stats.validate();
  if (!(d >= 0.0)) throw ArgumentError("normalize_distance: distance must be >= 0");
  return std::min(d / stats.d_max, 1.0);
}

namespace detail {

inline const std::array<RgbPixel, 256>& jet_table() {
  static const std::array<RgbPixel, 256> table = [] {
    std::array<RgbPixel, 256> t{};
    auto ramp = [](double v, double center) { return std::clamp(1.5 - std::abs(4.0 * v - center), 0.0, 1.0); };
    for (int i = 0; i < 256; ++i) {
      const double v = static_cast<double>(i) / 255.0;
      t[static_cast<std::size_t>(i)] = {to_channel(ramp(v, 3.0) * 255.0), to_channel(ramp(v, 2.0) * 255.0),
                                        to_channel(ramp(v, 1.0) * 255.0)};
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// 256-level JET palette, dark blue (0) through cyan, yellow to dark red (1).
inline RgbPixel jet_color(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("jet_color: value must lie in [0,1]");
  const auto level = static_cast<std::size_t>(std::floor(v * 255.0 + 0.5));
  return detail::jet_table()[level];
}

// Unit vector components (x,y,z) in [-1,1] mapped affinely onto (R,G,B).
inline RgbPixel orient_color(Vec3 u) {
  const double n = norm(u);
  if (!(std::abs(n - 1.0) <= 1e-6)) throw ArgumentError("orient_color: input is not a unit vector");
  auto map = [](double c) { return to_channel((c + 1.0) / 2.0 * 255.0); };
  return {map(u.x), map(u.y), map(u.z)};
}

// ------------------------------------------------------------------ columns

enum class FeatureKind { pose, motion };

struct FeatureColumn {
  std::vector<RgbPixel> pixels;  // distance segment, then orientation segment
  FeatureKind kind = FeatureKind::pose;
  int source_t = 0;           // frame index t (motion columns span t -> t+1)
  std::size_t removed = 0;    // orientation pixels dropped for coincident pairs
};

inline std::size_t pose_pair_count(std::size_t joints) { return joints * (joints - 1) / 2; }
inline std::size_t motion_pair_count(std::size_t joints) { return joints * joints; }

// Unordered pairs j < k in lexicographic order: all distance pixels, then
// the orientation pixels of the non-coincident pairs.
inline FeatureColumn pose_feature(const SkeletonFrame& frame, const DistanceStats& stats) {
  const std::size_t J = frame.joints.size();
  if (J < 2) throw ArgumentError("pose_feature: frame needs at least 2 joints");
  stats.validate();
  FeatureColumn col;
  col.kind = FeatureKind::pose;
  col.source_t = frame.timestamp_index;
  const std::size_t P = pose_pair_count(J);
  col.pixels.resize(P);
  std::vector<RgbPixel> orient;
  orient.reserve(P);
  std::size_t i = 0;
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = j + 1; k < J; ++k, ++i) {
      const Joint3 a = frame.joints[j], b = frame.joints[k];
      col.pixels[i] = jet_color(normalize_distance(jjd(a, b), stats));
      if (auto u = jjo(a, b)) orient.push_back(orient_color(*u));
    }
  }
  col.removed = P - orient.size();
  col.pixels.insert(col.pixels.end(), orient.begin(), orient.end());
  return col;
}

// Ordered pairs (j at t, k at t+1) over the full J x J grid, row-major,
// j == k included (that entry is joint j's own displacement).
inline FeatureColumn motion_feature(const SkeletonFrame& f_t, const SkeletonFrame& f_t1,
                                    const DistanceStats& stats) {
  const std::size_t J = f_t.joints.size();
  if (J != f_t1.joints.size()) throw ArgumentError("motion_feature: frames have different joint counts");
  if (J < 1) throw ArgumentError("motion_feature: frames have no joints");
  stats.validate();
  FeatureColumn col;
  col.kind = FeatureKind::motion;
  col.source_t = f_t.timestamp_index;
  const std::size_t M = motion_pair_count(J);
  col.pixels.resize(M);
  std::vector<RgbPixel> orient;
  orient.reserve(M);
  std::size_t i = 0;
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t k = 0; k < J; ++k, ++i) {
      const Joint3 a = f_t.joints[j], b = f_t1.joints[k];
      col.pixels[i] = jet_color(normalize_distance(cross_jjd(a, b), stats));
      if (auto u = cross_jjo(a, b)) orient.push_back(orient_color(*u));
    }
  }
  col.removed = M - orient.size();
  col.pixels.insert(col.pixels.end(), orient.begin(), orient.end());
  return col;
}

// Height of every column of an image built from J-joint frames.
inline std::size_t spmf_height(std::size_t joints) { return 2 * motion_pair_count(joints); }

// Columns [PF^1 MF^1->2 PF^2 ... MF^N-1->N PF^N]; each column is extended
// to the common height by repeating its last pixel.
inline SpmfImage build_spmf(const SkeletonSequence& seq, const DistanceStats& stats) {
  const std::size_t N = seq.frames.size();
  if (N < 2) throw ArgumentError("build_spmf: need at least 2 frames");
  const std::size_t J = seq.frames.front().joints.size();
  if (J < 2) throw ArgumentError("build_spmf: frames need at least 2 joints");
  for (const auto& f : seq.frames) {
    if (f.joints.size() != J) throw ArgumentError("build_spmf: frames have different joint counts");
  }
  stats.validate();

  const std::size_t W = 2 * N - 1;
  const std::size_t H = spmf_height(J);
  SpmfImage img(W, H);
  img.provenance = {seq.id, stats.source, stats.d_max};

  auto place = [&](const FeatureColumn& col, std::size_t x) {
    for (std::size_t y = 0; y < H; ++y) {
      img.at(x, y) = y < col.pixels.size() ? col.pixels[y] : col.pixels.back();
    }
  };
  for (std::size_t t = 0; t < N; ++t) {
    place(pose_feature(seq.frames[t], stats), 2 * t);
    if (t + 1 < N) place(motion_feature(seq.frames[t], seq.frames[t + 1], stats), 2 * t + 1);
  }
  return img;
}

// build_spmf followed by resize to the network input size.
inline SpmfImage encode_sequence(const SkeletonSequence& seq, const DistanceStats& stats, std::size_t out_w = 32,
                                 std::size_t out_h = 32) {
  return resize_image(build_spmf(seq, stats), out_w, out_h);
}

}  // namespace spmf
