#pragma once

// Readers for the two public skeleton text layouts (MSR Action3D and
// NTU RGB+D .skeleton), their writers, and a seeded synthetic sequence
// generator used as a test fixture.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spmf/error.hpp"
#include "spmf/rng.hpp"
#include "spmf/skeleton.hpp"

namespace spmf {

struct MsrFormatConfig {
  int joints_per_frame = 20;
  int values_per_row = 4;  // x y z confidence

  void validate() const {
    if (joints_per_frame < 2) throw ArgumentError("MsrFormatConfig: joints_per_frame must be >= 2");
    if (values_per_row < 3) throw ArgumentError("MsrFormatConfig: values_per_row must be >= 3");
  }
};

struct NtuFormatConfig {
  int joints_per_body = 25;
  // x y z, depth u v, color u v, orientation w x y z, tracking state
  int values_per_joint_row = 12;

  void validate() const {
    if (joints_per_body < 2) throw ArgumentError("NtuFormatConfig: joints_per_body must be >= 2");
    if (values_per_joint_row < 3) throw ArgumentError("NtuFormatConfig: values_per_joint_row must be >= 3");
  }
};

namespace detail {

struct Line {
  std::size_t number = 0;  // 1-based
  std::size_t offset = 0;  // byte offset of the first character
  std::vector<std::string_view> tokens;
};

// Walks non-blank lines of a text buffer, splitting each on whitespace.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::optional<Line> next() {
    while (pos_ < text_.size()) {
      Line line;
      line.number = ++line_no_;
      line.offset = pos_;
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view body = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      std::size_t i = 0;
      while (i < body.size()) {
        while (i < body.size() && is_space(body[i])) ++i;
        std::size_t start = i;
        while (i < body.size() && !is_space(body[i])) ++i;
        if (i > start) line.tokens.push_back(body.substr(start, i - start));
      }
      if (!line.tokens.empty()) return line;
    }
    return std::nullopt;
  }

  std::size_t size() const noexcept { return text_.size(); }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

inline std::optional<double> to_double(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<long long> to_integer(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
  return value;
}

inline std::optional<int> small_int(std::string_view tok) {
  auto v = to_integer(tok);
  if (!v || *v < 0 || *v > 1'000'000) return std::nullopt;
  return static_cast<int>(*v);
}

// Shortest text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// ---------------------------------------------------------------- MSR Action3D

struct MsrName {
  int action = 0;
  int subject = 0;
  int episode = 0;
};

// Parses "aAA_sSS_eEE" anywhere in `name` (e.g. "a01_s03_e02_skeleton3D.txt").
inline std::optional<MsrName> parse_msr_name(std::string_view name) {
  static const std::regex pattern(R"(a(\d+)_s(\d+)_e(\d+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(name.begin(), name.end(), m, pattern)) return std::nullopt;
  auto a = detail::small_int(m[1].str()), s = detail::small_int(m[2].str()), e = detail::small_int(m[3].str());
  if (!a || !s || !e) return std::nullopt;
  return MsrName{*a, *s, *e};
}

// One row per joint, `values_per_row` whitespace-separated reals per row,
// `joints_per_frame` consecutive rows per frame. Columns 1-3 are x y z; a
// fourth column, when present, is kept as the joint confidence.
inline SkeletonSequence parse_msr(std::string_view text, const MsrFormatConfig& cfg = {},
                                  std::string_view name = {}, const std::string& path = {}) {
  cfg.validate();
  detail::LineReader reader(text);
  std::vector<Joint3> joints;
  std::vector<double> confidence;
  std::size_t rows = 0;
  std::size_t last_line = 0;
  while (auto line = reader.next()) {
    last_line = line->number;
    if (static_cast<int>(line->tokens.size()) != cfg.values_per_row) {
      throw FormatError(path, line->number, 0,
                        "expected " + std::to_string(cfg.values_per_row) + " values per row, found " +
                            std::to_string(line->tokens.size()));
    }
    double v[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < line->tokens.size(); ++i) {
      auto parsed = detail::to_double(line->tokens[i]);
      if (!parsed) {
        throw FormatError(path, line->number, 0,
                          "non-numeric or non-finite token '" + std::string(line->tokens[i]) + "'");
      }
      if (i < 4) v[i] = *parsed;
    }
    joints.push_back({v[0], v[1], v[2]});
    if (cfg.values_per_row >= 4) confidence.push_back(v[3]);
    ++rows;
  }
  const auto per_frame = static_cast<std::size_t>(cfg.joints_per_frame);
  if (rows == 0) throw FormatError(path, 0, 0, "no joint rows");
  if (rows % per_frame != 0) {
    throw FormatError(path, last_line, 0,
                      "row count " + std::to_string(rows) + " not divisible by " + std::to_string(per_frame));
  }

  SkeletonSequence seq;
  seq.joint_count = cfg.joints_per_frame;
  const std::size_t n = rows / per_frame;
  seq.frames.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    SkeletonFrame frame;
    frame.timestamp_index = static_cast<int>(t) + 1;
    frame.joints.assign(joints.begin() + t * per_frame, joints.begin() + (t + 1) * per_frame);
    if (!confidence.empty()) {
      frame.confidence.assign(confidence.begin() + t * per_frame, confidence.begin() + (t + 1) * per_frame);
    }
    seq.frames.push_back(std::move(frame));
  }
  if (auto meta = parse_msr_name(name)) {
    seq.label = meta->action;
    seq.subject_id = meta->subject;
  }
  seq.id = std::string(name);
  return seq;
}

inline std::string serialize_msr(const SkeletonSequence& seq, const MsrFormatConfig& cfg = {}) {
  cfg.validate();
  std::string out;
  for (const auto& frame : seq.frames) {
    for (std::size_t j = 0; j < frame.joints.size(); ++j) {
      const Joint3& p = frame.joints[j];
      out += detail::format_double(p.x) + ' ' + detail::format_double(p.y) + ' ' + detail::format_double(p.z);
      for (int extra = 3; extra < cfg.values_per_row; ++extra) {
        double v = 0.0;
        if (extra == 3 && j < frame.confidence.size()) v = frame.confidence[j];
        out += ' ' + detail::format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

// ------------------------------------------------------------------ NTU RGB+D

struct NtuName {
  int setup = 0;
  int camera = 0;
  int performer = 0;
  int replication = 0;
  int action = 0;
};

// Parses "SsssCcccPpppRrrrAaaa" anywhere in `name`.
inline std::optional<NtuName> parse_ntu_name(std::string_view name) {
  static const std::regex pattern(R"(S(\d{3})C(\d{3})P(\d{3})R(\d{3})A(\d{3}))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(name.begin(), name.end(), m, pattern)) return std::nullopt;
  return NtuName{*detail::small_int(m[1].str()), *detail::small_int(m[2].str()), *detail::small_int(m[3].str()),
                 *detail::small_int(m[4].str()), *detail::small_int(m[5].str())};
}

// Layout: frame count; then per frame a body count and, per body, a body
// header row (first token = body id), a joint-count row and one row per
// joint. Returns one sequence per distinct body id in order of first
// appearance; frames where a body is absent are skipped for that body.
inline std::vector<SkeletonSequence> parse_ntu(std::string_view text, const NtuFormatConfig& cfg = {},
                                               std::string_view name = {}, const std::string& path = {}) {
  cfg.validate();
  detail::LineReader reader(text);

  auto next_line = [&](const char* expecting) {
    auto line = reader.next();
    if (!line) throw FormatError(path, 0, reader.size(), std::string("truncated file: expected ") + expecting);
    return *line;
  };
  auto single_count = [&](const char* what) {
    detail::Line line = next_line(what);
    auto value = line.tokens.size() == 1 ? detail::to_integer(line.tokens[0]) : std::nullopt;
    if (!value || *value < 0) {
      throw FormatError(path, line.number, line.offset, std::string("invalid ") + what);
    }
    return std::pair{*value, line};
  };

  std::vector<SkeletonSequence> bodies;
  std::map<std::string, std::size_t, std::less<>> body_index;

  const auto [frame_count, first] = single_count("frame count");
  (void)first;
  for (long long f = 0; f < frame_count; ++f) {
    const auto [body_count, body_line] = single_count("body count");
    (void)body_line;
    for (long long b = 0; b < body_count; ++b) {
      detail::Line header = next_line("body header");
      std::string body_id(header.tokens[0]);

      const auto [joint_count, count_line] = single_count("joint count");
      if (joint_count != cfg.joints_per_body) {
        throw FormatError(path, count_line.number, count_line.offset,
                          "declared joint count " + std::to_string(joint_count) + " != expected " +
                              std::to_string(cfg.joints_per_body));
      }
      SkeletonFrame frame;
      frame.joints.reserve(static_cast<std::size_t>(cfg.joints_per_body));
      for (int j = 0; j < cfg.joints_per_body; ++j) {
        detail::Line row = next_line("joint row");
        if (static_cast<int>(row.tokens.size()) != cfg.values_per_joint_row) {
          throw FormatError(path, row.number, row.offset,
                            "expected " + std::to_string(cfg.values_per_joint_row) + " values per joint row, found " +
                                std::to_string(row.tokens.size()));
        }
        double xyz[3];
        for (std::size_t i = 0; i < row.tokens.size(); ++i) {
          auto v = detail::to_double(row.tokens[i]);
          if (!v) {
            throw FormatError(path, row.number, row.offset,
                              "non-numeric or non-finite token '" + std::string(row.tokens[i]) + "'");
          }
          if (i < 3) xyz[i] = *v;
        }
        frame.joints.push_back({xyz[0], xyz[1], xyz[2]});
      }

      auto [it, inserted] = body_index.try_emplace(body_id, bodies.size());
      if (inserted) {
        SkeletonSequence seq;
        seq.joint_count = cfg.joints_per_body;
        seq.body_id = body_id;
        seq.id = std::string(name);
        bodies.push_back(std::move(seq));
      }
      SkeletonSequence& seq = bodies[it->second];
      frame.timestamp_index = static_cast<int>(seq.frames.size()) + 1;
      seq.frames.push_back(std::move(frame));
    }
  }

  if (auto meta = parse_ntu_name(name)) {
    for (auto& seq : bodies) {
      seq.label = meta->action;
      seq.subject_id = meta->performer;
      seq.camera_id = meta->camera;
    }
  }
  return bodies;
}

// Writes bodies back in .skeleton layout. Frame t carries every body that
// has a t-th frame. Non-coordinate columns are written as zeros.
inline std::string serialize_ntu(std::span<const SkeletonSequence> bodies, const NtuFormatConfig& cfg = {}) {
  cfg.validate();
  std::size_t frames = 0;
  for (const auto& b : bodies) frames = std::max(frames, b.frames.size());
  std::string out = std::to_string(frames) + '\n';
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t present = 0;
    for (const auto& b : bodies) present += t < b.frames.size() ? 1 : 0;
    out += std::to_string(present) + '\n';
    for (const auto& b : bodies) {
      if (t >= b.frames.size()) continue;
      out += (b.body_id.empty() ? std::string("0") : b.body_id) + " 0 0 0 0 0 0 0 0 2\n";
      out += std::to_string(b.frames[t].joints.size()) + '\n';
      for (const auto& p : b.frames[t].joints) {
        out += detail::format_double(p.x) + ' ' + detail::format_double(p.y) + ' ' + detail::format_double(p.z);
        for (int extra = 3; extra < cfg.values_per_joint_row; ++extra) out += " 0";
        out += '\n';
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------ synthetic

// Per-joint periodic displacement: amplitude * sin(2*pi*frequency*tau + phase)
// along `direction`, with tau running 0..1 over the sequence.
struct JointMotion {
  Vec3 direction{1.0, 0.0, 0.0};
  double amplitude = 0.0;
  double frequency = 1.0;  // cycles per sequence
  double phase = 0.0;
};

struct SynthTemplate {
  int class_id = 0;
  std::vector<Joint3> base_pose;
  std::vector<JointMotion> motion;  // empty, or one per joint
  double noise_sigma = 0.0;

  void validate() const {
    if (base_pose.size() < 2) throw ArgumentError("SynthTemplate: base_pose needs at least 2 joints");
    if (!motion.empty() && motion.size() != base_pose.size()) {
      throw ArgumentError("SynthTemplate: motion must be empty or have one entry per joint");
    }
    if (!(noise_sigma >= 0.0)) throw ArgumentError("SynthTemplate: noise_sigma must be >= 0");
    for (const auto& m : motion) {
      if (!(m.amplitude >= 0.0)) throw ArgumentError("SynthTemplate: amplitude must be >= 0");
    }
  }
};

inline SkeletonSequence synth_sequence(const SynthTemplate& tmpl, int n_frames, std::uint64_t seed) {
  if (n_frames < 2) throw ArgumentError("synth_sequence: n_frames must be >= 2");
  tmpl.validate();
  Rng rng(seed);
  SkeletonSequence seq;
  seq.label = tmpl.class_id;
  seq.joint_count = static_cast<int>(tmpl.base_pose.size());
  seq.frames.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(n_frames - 1);
    SkeletonFrame frame;
    frame.timestamp_index = t + 1;
    frame.joints.reserve(tmpl.base_pose.size());
    for (std::size_t j = 0; j < tmpl.base_pose.size(); ++j) {
      Joint3 p = tmpl.base_pose[j];
      if (!tmpl.motion.empty()) {
        const JointMotion& m = tmpl.motion[j];
        const double s = m.amplitude * std::sin(2.0 * std::numbers::pi * m.frequency * tau + m.phase);
        p = p + s * m.direction;
      }
      if (tmpl.noise_sigma > 0.0) {
        p.x += rng.normal(0.0, tmpl.noise_sigma);
        p.y += rng.normal(0.0, tmpl.noise_sigma);
        p.z += rng.normal(0.0, tmpl.noise_sigma);
      }
      frame.joints.push_back(p);
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

// A family of `classes` templates sharing one seeded base pose (roughly
// person-sized: 0.6 m wide, 1.8 m tall, 0.3 m deep) and differing in the
// per-joint trajectories. Class ids run 1..classes.
inline std::vector<SynthTemplate> make_synth_templates(int classes, int joint_count, double noise_sigma,
                                                       std::uint64_t seed) {
  if (classes < 1) throw ArgumentError("make_synth_templates: classes must be >= 1");
  if (joint_count < 2) throw ArgumentError("make_synth_templates: joint_count must be >= 2");
  Rng pose_rng(splitmix64(seed));
  std::vector<Joint3> base(static_cast<std::size_t>(joint_count));
  for (auto& p : base) {
    p = {pose_rng.uniform(-0.3, 0.3), pose_rng.uniform(0.0, 1.8), pose_rng.uniform(2.5, 2.8)};
  }
  std::vector<SynthTemplate> out;
  out.reserve(static_cast<std::size_t>(classes));
  for (int c = 1; c <= classes; ++c) {
    Rng rng(splitmix64(seed + static_cast<std::uint64_t>(c)));
    SynthTemplate t;
    t.class_id = c;
    t.base_pose = base;
    t.noise_sigma = noise_sigma;
    t.motion.resize(base.size());
    for (auto& m : t.motion) {
      Vec3 d{rng.normal(), rng.normal(), rng.normal()};
      const double n = norm(d);
      m.direction = n > 0.0 ? d / n : Vec3{1.0, 0.0, 0.0};
      m.amplitude = rng.uniform(0.05, 0.35);
      m.frequency = 0.5 * static_cast<double>(1 + rng.below(4));
      m.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace spmf
