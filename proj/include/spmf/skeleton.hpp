#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace spmf {

// 3-vector of doubles. Used both for joint positions (sensor-space
// coordinates, units as delivered by the source format) and for directions.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

using Joint3 = Vec3;

struct SkeletonFrame {
  std::vector<Joint3> joints;
  int timestamp_index = 1;  // 1-based position in the sequence
  // Per-joint tracking confidence when the source format has one (MSR).
  // Empty otherwise. Never read by the encoder.
  std::vector<double> confidence;

  bool operator==(const SkeletonFrame&) const = default;
};

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  int label = 0;
  int subject_id = 0;
  int camera_id = 0;
  int joint_count = 0;
  std::string id;       // sample id, e.g. "a01_s01_e01"
  std::string body_id;  // tracked-body id for multi-body formats (NTU)

  std::size_t frame_count() const noexcept { return frames.size(); }
  bool operator==(const SkeletonSequence&) const = default;
};

struct Violation {
  int frame = 0;  // 1-based; 0 = sequence-level
  std::string rule;

  bool operator==(const Violation&) const = default;
};

// Violations break a type invariant. Warnings are observations the
// pipeline may act on (all-zero dropout frames) but are not invariant breaches.
struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;

  bool ok() const noexcept { return violations.empty(); }
  bool operator==(const ValidationReport&) const = default;
};

inline ValidationReport validate_sequence(const SkeletonSequence& seq) {
  ValidationReport report;
  if (seq.frames.empty()) {
    report.violations.push_back({0, "sequence has no frames"});
  }
  if (seq.joint_count < 1) {
    report.violations.push_back({0, "joint_count must be positive"});
  }
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const SkeletonFrame& frame = seq.frames[i];
    const int t = static_cast<int>(i) + 1;
    if (frame.timestamp_index != t) {
      report.violations.push_back(
          {t, "frame index " + std::to_string(frame.timestamp_index) + " is not contiguous (expected " +
                  std::to_string(t) + ")"});
    }
    if (static_cast<int>(frame.joints.size()) != seq.joint_count) {
      report.violations.push_back({t, "joint count mismatch at frame " + std::to_string(t) + ": " +
                                          std::to_string(frame.joints.size()) + " != " +
                                          std::to_string(seq.joint_count)});
    }
    bool all_zero = !frame.joints.empty();
    for (std::size_t j = 0; j < frame.joints.size(); ++j) {
      const Joint3& p = frame.joints[j];
      if (!p.finite()) {
        report.violations.push_back(
            {t, "non-finite coordinate at frame " + std::to_string(t) + " joint " + std::to_string(j + 1)});
      }
      if (!(p == Joint3{})) all_zero = false;
    }
    if (all_zero) {
      report.warnings.push_back({t, "all joints zero at frame " + std::to_string(t) + " (tracking dropout)"});
    }
  }
  return report;
}

}  // namespace spmf
