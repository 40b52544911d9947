#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracle/naive_spmf.hpp"
#include "spmf/spmf.hpp"

namespace spmf::testing {

// Random skeleton: joints uniform in a 2 m box around the origin.
inline SkeletonSequence random_sequence(Rng& rng, int joints, int frames, double half_extent = 1.0) {
  SkeletonSequence seq;
  seq.joint_count = joints;
  seq.id = "rand";
  for (int t = 0; t < frames; ++t) {
    SkeletonFrame f;
    f.timestamp_index = t + 1;
    for (int j = 0; j < joints; ++j) {
      f.joints.push_back({rng.uniform(-half_extent, half_extent), rng.uniform(-half_extent, half_extent),
                          rng.uniform(-half_extent, half_extent)});
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

inline std::vector<oracle::Frame> to_oracle(const SkeletonSequence& seq) {
  std::vector<oracle::Frame> out;
  for (const auto& f : seq.frames) {
    oracle::Frame of;
    for (const auto& p : f.joints) of.push_back({p.x, p.y, p.z});
    out.push_back(std::move(of));
  }
  return out;
}

inline bool same_as_oracle(const SpmfImage& img, const oracle::Image& ref) {
  if (img.width != static_cast<std::size_t>(ref.width) || img.height != static_cast<std::size_t>(ref.height)) {
    return false;
  }
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const auto& p = img.pixels[i];
    const auto& q = ref.pixels[i];
    if (p.r != q[0] || p.g != q[1] || p.b != q[2]) return false;
  }
  return true;
}

inline DistanceStats stats_with_max(double d_max) {
  DistanceStats s;
  s.d_max = d_max;
  s.source = "test";
  return s;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "spmf") {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

// Writes `count` synthetic MSR-layout sequences per class plus a custom-
// protocol manifest; the first `train` of each class go to the train split.
inline std::filesystem::path write_synth_corpus(const std::filesystem::path& dir, int classes, int train, int test,
                                                int joints, int frames, double noise, std::uint64_t seed) {
  std::filesystem::create_directories(dir / "skeletons");
  const auto templates = make_synth_templates(classes, joints, noise, seed);
  DatasetManifest m;
  m.dataset = "synth";
  m.msr.joints_per_frame = joints;
  m.protocol = Protocol::custom;
  for (const auto& t : templates) {
    for (int i = 0; i < train + test; ++i) {
      const std::string id = "a" + std::to_string(t.class_id) + "_s" + std::to_string(i + 1) + "_e1";
      const auto seq = synth_sequence(t, frames, derive_seed(seed, id));
      const std::string rel = "skeletons/" + id + ".txt";
      std::ofstream(dir / rel) << serialize_msr(seq, m.msr);
      m.entries.push_back({id, rel, t.class_id, i + 1, 0});
      (i < train ? m.split.train_ids : m.split.test_ids).push_back(id);
    }
  }
  const auto manifest = dir / "manifest.json";
  std::ofstream(manifest) << to_json(m).dump(2);
  return manifest;
}

}  // namespace spmf::testing
