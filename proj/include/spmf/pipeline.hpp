#pragma once

// Corpus orchestration: manifests, protocol splits, distance statistics,
// and bulk encoding to a PNG tree plus a JSON-lines index.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "spmf/augment.hpp"
#include "spmf/encoding.hpp"
#include "spmf/error.hpp"
#include "spmf/ingest.hpp"
#include "spmf/png.hpp"
#include "spmf/rng.hpp"

namespace spmf {

namespace fs = std::filesystem;

enum class Protocol { msr_as1, msr_as2, msr_as3, ntu_cross_subject, ntu_cross_view, custom };
enum class SourceFormat { msr, ntu };

NLOHMANN_JSON_SERIALIZE_ENUM(Protocol, {{Protocol::custom, "custom"},
                                        {Protocol::msr_as1, "msr_as1"},
                                        {Protocol::msr_as2, "msr_as2"},
                                        {Protocol::msr_as3, "msr_as3"},
                                        {Protocol::ntu_cross_subject, "ntu_cross_subject"},
                                        {Protocol::ntu_cross_view, "ntu_cross_view"}})

NLOHMANN_JSON_SERIALIZE_ENUM(SourceFormat, {{SourceFormat::msr, "msr"}, {SourceFormat::ntu, "ntu"}})

inline std::string to_string(Protocol p) { return nlohmann::json(p).get<std::string>(); }

struct ManifestEntry {
  std::string id;
  std::string path;  // relative paths resolve against DatasetManifest::base_dir
  int label = 0;
  int subject = 0;
  int camera = 0;
};

// Protocol parameters. Which lists matter depends on the protocol.
struct SplitParams {
  std::vector<int> classes;         // msr_as*: the subset's action labels
  std::vector<int> train_subjects;  // msr_as*, ntu_cross_subject
  std::vector<int> test_subjects;   // empty for ntu_cross_subject = "everyone else"
  std::vector<int> train_cameras;   // ntu_cross_view
  std::vector<int> test_cameras;
  std::vector<std::string> train_ids;  // custom
  std::vector<std::string> test_ids;
};

struct DatasetManifest {
  std::string dataset = "dataset";  // prefix of output filenames
  SourceFormat format = SourceFormat::msr;
  MsrFormatConfig msr;
  NtuFormatConfig ntu;
  Protocol protocol = Protocol::custom;
  SplitParams split;
  std::vector<ManifestEntry> entries;
  fs::path base_dir;

  fs::path resolve(const ManifestEntry& e) const {
    fs::path p(e.path);
    return p.is_relative() ? base_dir / p : p;
  }
};

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Subset class lists, subject halves and NTU training performers as
// commonly used with the two datasets. These are conventions from the
// dataset publications; edit the manifest when a different split is wanted.
inline SplitParams default_split_params(Protocol p) {
  SplitParams s;
  switch (p) {
    case Protocol::msr_as1:
      s.classes = {2, 3, 5, 6, 10, 13, 18, 20};
      break;
    case Protocol::msr_as2:
      s.classes = {1, 4, 7, 8, 9, 11, 12, 14};
      break;
    case Protocol::msr_as3:
      s.classes = {6, 14, 15, 16, 17, 18, 19, 20};
      break;
    case Protocol::ntu_cross_subject:
      s.train_subjects = {1, 2, 4, 5, 8, 9, 13, 14, 15, 16, 17, 18, 19, 25, 27, 28, 31, 34, 35, 38};
      break;
    case Protocol::ntu_cross_view:
      s.train_cameras = {2, 3};
      s.test_cameras = {1};
      break;
    case Protocol::custom:
      break;
  }
  if (p == Protocol::msr_as1 || p == Protocol::msr_as2 || p == Protocol::msr_as3) {
    s.train_subjects = {1, 3, 5, 7, 9};
    s.test_subjects = {2, 4, 6, 8, 10};
  }
  return s;
}

inline bool is_msr_subset(Protocol p) {
  return p == Protocol::msr_as1 || p == Protocol::msr_as2 || p == Protocol::msr_as3;
}

namespace detail {

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <typename T>
void read_list(const nlohmann::json& j, const char* key, std::vector<T>& out) {
  if (j.contains(key)) out = j.at(key).get<std::vector<T>>();
}

}  // namespace detail

inline void validate_manifest(const DatasetManifest& m) {
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (e.id.empty()) throw ManifestError("manifest entry with empty id");
    if (!ids.insert(e.id).second) throw ManifestError("duplicate sample id '" + e.id + "'");
    // msr_as* protocols filter by class list instead of rejecting.
    if (!is_msr_subset(m.protocol) && !m.split.classes.empty() && !detail::contains(m.split.classes, e.label)) {
      throw ManifestError("sample '" + e.id + "' has label " + std::to_string(e.label) +
                          " outside the protocol class set");
    }
  }
}

// Schema:
//   { "dataset": str, "format": "msr"|"ntu", "protocol": str,
//     "format_config": {...}, "split": {...}, "entries": [ {id, path, label?, subject?, camera?} ] }
// Split lists absent from "split" are filled from default_split_params.
// A missing label/subject/camera is taken from the dataset naming convention
// of the entry id when it matches one.
inline DatasetManifest parse_manifest(const nlohmann::json& j, const fs::path& base_dir = {}) {
  DatasetManifest m;
  try {
    m.base_dir = base_dir;
    m.dataset = j.value("dataset", std::string("dataset"));
    m.format = j.value("format", SourceFormat::msr);
    if (j.contains("format") && nlohmann::json(m.format) != j.at("format")) {
      throw ManifestError("manifest: unknown format " + j.at("format").dump());
    }
    if (!j.contains("protocol")) throw ManifestError("manifest: missing 'protocol'");
    const std::string proto_name = j.at("protocol").get<std::string>();
    m.protocol = j.at("protocol").get<Protocol>();
    if (to_string(m.protocol) != proto_name) throw ManifestError("manifest: unknown protocol '" + proto_name + "'");

    if (j.contains("format_config")) {
      const auto& fc = j.at("format_config");
      m.msr.joints_per_frame = fc.value("joints_per_frame", m.msr.joints_per_frame);
      m.msr.values_per_row = fc.value("values_per_row", m.msr.values_per_row);
      m.ntu.joints_per_body = fc.value("joints_per_body", m.ntu.joints_per_body);
      m.ntu.values_per_joint_row = fc.value("values_per_joint_row", m.ntu.values_per_joint_row);
    }

    m.split = default_split_params(m.protocol);
    if (j.contains("split")) {
      const auto& s = j.at("split");
      detail::read_list(s, "classes", m.split.classes);
      detail::read_list(s, "train_subjects", m.split.train_subjects);
      detail::read_list(s, "test_subjects", m.split.test_subjects);
      detail::read_list(s, "train_cameras", m.split.train_cameras);
      detail::read_list(s, "test_cameras", m.split.test_cameras);
      detail::read_list(s, "train_ids", m.split.train_ids);
      detail::read_list(s, "test_ids", m.split.test_ids);
    }

    for (const auto& je : j.value("entries", nlohmann::json::array())) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      e.path = je.at("path").get<std::string>();
      int label = 0, subject = 0, camera = 0;
      if (auto msr = parse_msr_name(e.id)) {
        label = msr->action;
        subject = msr->subject;
      } else if (auto ntu = parse_ntu_name(e.id)) {
        label = ntu->action;
        subject = ntu->performer;
        camera = ntu->camera;
      } else if (!je.contains("label")) {
        throw ManifestError("manifest: entry '" + e.id + "' has no label");
      }
      e.label = je.value("label", label);
      e.subject = je.value("subject", subject);
      e.camera = je.value("camera", camera);
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ManifestError(std::string("manifest: ") + ex.what());
  }
  validate_manifest(m);
  return m;
}

inline DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ManifestError("manifest " + path.string() + ": " + ex.what());
  }
  return parse_manifest(j, path.parent_path());
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["dataset"] = m.dataset;
  j["format"] = m.format;
  j["protocol"] = m.protocol;
  if (m.format == SourceFormat::msr) {
    j["format_config"] = {{"joints_per_frame", m.msr.joints_per_frame}, {"values_per_row", m.msr.values_per_row}};
  } else {
    j["format_config"] = {{"joints_per_body", m.ntu.joints_per_body},
                          {"values_per_joint_row", m.ntu.values_per_joint_row}};
  }
  j["split"] = {{"classes", m.split.classes},           {"train_subjects", m.split.train_subjects},
                {"test_subjects", m.split.test_subjects}, {"train_cameras", m.split.train_cameras},
                {"test_cameras", m.split.test_cameras},   {"train_ids", m.split.train_ids},
                {"test_ids", m.split.test_ids}};
  auto entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back(
        {{"id", e.id}, {"path", e.path}, {"label", e.label}, {"subject", e.subject}, {"camera", e.camera}});
  }
  j["entries"] = std::move(entries);
  return j;
}

// --------------------------------------------------------------- splitting

inline SplitAssignment split_dataset(const DatasetManifest& m) {
  SplitAssignment out;
  const SplitParams& s = m.split;
  if (m.protocol == Protocol::custom) {
    std::set<std::string> known;
    for (const auto& e : m.entries) known.insert(e.id);
    std::set<std::string> train(s.train_ids.begin(), s.train_ids.end());
    for (const auto& id : s.train_ids) {
      if (!known.count(id)) throw ManifestError("custom split: unknown train id '" + id + "'");
    }
    for (const auto& id : s.test_ids) {
      if (!known.count(id)) throw ManifestError("custom split: unknown test id '" + id + "'");
      if (train.count(id)) throw ManifestError("custom split: id '" + id + "' in both train and test");
    }
    out.train = s.train_ids;
    out.test = s.test_ids;
    return out;
  }

  for (const auto& e : m.entries) {
    switch (m.protocol) {
      case Protocol::msr_as1:
      case Protocol::msr_as2:
      case Protocol::msr_as3:
        if (!detail::contains(s.classes, e.label)) break;
        if (detail::contains(s.train_subjects, e.subject)) {
          out.train.push_back(e.id);
        } else if (detail::contains(s.test_subjects, e.subject)) {
          out.test.push_back(e.id);
        } else {
          throw ManifestError("sample '" + e.id + "': subject " + std::to_string(e.subject) +
                              " is in neither subject list");
        }
        break;
      case Protocol::ntu_cross_subject:
        if (detail::contains(s.train_subjects, e.subject)) {
          out.train.push_back(e.id);
        } else if (s.test_subjects.empty() || detail::contains(s.test_subjects, e.subject)) {
          out.test.push_back(e.id);
        } else {
          throw ManifestError("sample '" + e.id + "': subject " + std::to_string(e.subject) +
                              " is in neither subject list");
        }
        break;
      case Protocol::ntu_cross_view:
        if (detail::contains(s.train_cameras, e.camera)) {
          out.train.push_back(e.id);
        } else if (detail::contains(s.test_cameras, e.camera)) {
          out.test.push_back(e.id);
        } else {
          throw ManifestError("sample '" + e.id + "': camera " + std::to_string(e.camera) +
                              " is in neither camera list");
        }
        break;
      case Protocol::custom:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- loading

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Parses one manifest entry. NTU files can hold several bodies; each comes
// back as its own sequence (id suffixed "_b<k>" when there is more than one)
// carrying the entry's label.
inline std::vector<SkeletonSequence> load_entry(const DatasetManifest& m, const ManifestEntry& e) {
  const fs::path path = m.resolve(e);
  const std::string text = read_text_file(path);
  std::vector<SkeletonSequence> seqs;
  if (m.format == SourceFormat::msr) {
    seqs.push_back(parse_msr(text, m.msr, e.id, path.string()));
  } else {
    seqs = parse_ntu(text, m.ntu, e.id, path.string());
    if (seqs.empty()) throw FormatError(path.string(), 0, 0, "no tracked bodies");
  }
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    auto& s = seqs[b];
    s.label = e.label;
    s.subject_id = e.subject;
    s.camera_id = e.camera;
    s.id = seqs.size() > 1 ? e.id + "_b" + std::to_string(b + 1) : e.id;
  }
  return seqs;
}

// ------------------------------------------------------------------ stats

// Largest within-frame joint distance over every frame of every sequence.
template <typename Range>
DistanceStats compute_stats(const Range& sequences, std::string source = {}) {
  DistanceStats stats;
  stats.source = std::move(source);
  for (const SkeletonSequence& seq : sequences) {
    ++stats.sequences;
    for (const auto& f : seq.frames) {
      for (std::size_t j = 0; j < f.joints.size(); ++j) {
        for (std::size_t k = j + 1; k < f.joints.size(); ++k) {
          stats.d_max = std::max(stats.d_max, jjd(f.joints[j], f.joints[k]));
        }
      }
    }
  }
  if (stats.sequences == 0) throw StatsError("compute_stats: empty corpus");
  if (!(stats.d_max > 0.0)) throw StatsError("compute_stats: all joints coincide, d_max = 0");
  stats.validate();
  return stats;
}

enum class StatsScope { whole, train };

struct SampleError {
  std::string sample;
  std::string message;
};

struct CorpusStats {
  DistanceStats stats;
  std::vector<SampleError> errors;
};

// Stats over every manifest entry (whole) or the train split only. Entries
// that fail to load are reported and skipped.
inline CorpusStats compute_corpus_stats(const DatasetManifest& m, StatsScope scope = StatsScope::whole) {
  std::set<std::string> wanted;
  if (scope == StatsScope::train) {
    const auto split = split_dataset(m);
    wanted.insert(split.train.begin(), split.train.end());
  }
  CorpusStats out;
  std::vector<SkeletonSequence> seqs;
  for (const auto& e : m.entries) {
    if (scope == StatsScope::train && !wanted.count(e.id)) continue;
    try {
      for (auto& s : load_entry(m, e)) seqs.push_back(std::move(s));
    } catch (const std::exception& ex) {
      out.errors.push_back({e.id, ex.what()});
    }
  }
  out.stats = compute_stats(seqs, m.dataset);
  out.stats.scope = scope == StatsScope::train ? "train" : "whole";
  return out;
}

// --------------------------------------------------------------- encoding

struct EncodeConfig {
  fs::path out_dir;
  std::size_t out_w = 32;
  std::size_t out_h = 32;
  int replicas = 0;  // augmented copies per train sample
  AugmentConfig augment;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct IndexRow {
  std::string sample;
  std::string path;  // relative to the corpus root; empty on error
  int label = 0;
  std::string split;
  int replica = 0;
  int subject = 0;
  int camera = 0;
  std::string error;  // empty = ok

  bool ok() const noexcept { return error.empty(); }
  bool operator==(const IndexRow&) const = default;
};

inline nlohmann::json to_json(const IndexRow& r) {
  nlohmann::json j = {{"sample", r.sample}, {"label", r.label},     {"split", r.split},  {"replica", r.replica},
                      {"subject", r.subject}, {"camera", r.camera}, {"status", r.ok() ? "ok" : "error"}};
  if (r.ok()) {
    j["path"] = r.path;
  } else {
    j["error"] = r.error;
  }
  return j;
}

inline IndexRow index_row_from_json(const nlohmann::json& j) {
  IndexRow r;
  r.sample = j.at("sample").get<std::string>();
  r.label = j.at("label").get<int>();
  r.split = j.at("split").get<std::string>();
  r.replica = j.value("replica", 0);
  r.subject = j.value("subject", 0);
  r.camera = j.value("camera", 0);
  if (j.value("status", std::string("ok")) == "ok") {
    r.path = j.at("path").get<std::string>();
  } else {
    r.error = j.value("error", std::string("unknown error"));
  }
  return r;
}

inline void write_index(const fs::path& path, const std::vector<IndexRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write index " + path.string());
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
}

inline std::vector<IndexRow> read_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open index " + path.string());
  std::vector<IndexRow> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      rows.push_back(index_row_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + ex.what());
    }
  }
  return rows;
}

struct EncodeReport {
  std::vector<IndexRow> rows;
  std::size_t error_count = 0;
  std::size_t image_count = 0;
  fs::path index_path;
};

inline std::string image_filename(const std::string& dataset, const std::string& sample, int replica) {
  return replica == 0 ? dataset + "_" + sample + "_spmf.png"
                      : dataset + "_" + sample + "_r" + std::to_string(replica) + "_spmf.png";
}

// Encodes every split-eligible entry to <out>/<split>/<label>/<file>.png and
// writes <out>/index.jsonl in manifest order. Train samples additionally get
// `replicas` augmented copies. Unreadable samples become error rows.
inline EncodeReport encode_corpus(const DatasetManifest& m, const DistanceStats& stats, const EncodeConfig& cfg) {
  stats.validate();
  if (cfg.replicas < 0) throw ConfigError("encode: replicas must be >= 0");
  if (cfg.replicas > 0 && m.format == SourceFormat::ntu) {
    throw ConfigError("encode: augmentation is only applied to the msr profile");
  }
  if (cfg.replicas > 0) cfg.augment.validate();
  if (cfg.out_w < 1 || cfg.out_h < 1) throw ConfigError("encode: output size must be >= 1x1");

  const SplitAssignment split = split_dataset(m);
  std::map<std::string, std::string> split_of;
  for (const auto& id : split.train) split_of[id] = "train";
  for (const auto& id : split.test) split_of[id] = "test";

  std::vector<const ManifestEntry*> work;
  for (const auto& e : m.entries) {
    if (split_of.count(e.id)) work.push_back(&e);
  }
  fs::create_directories(cfg.out_dir);
  for (const auto* e : work) fs::create_directories(cfg.out_dir / split_of[e->id] / std::to_string(e->label));

  std::vector<std::vector<IndexRow>> slots(work.size());
  auto encode_one = [&](std::size_t i) {
    const ManifestEntry& e = *work[i];
    const std::string& which = split_of.at(e.id);
    const fs::path rel_dir = fs::path(which) / std::to_string(e.label);
    auto base_row = [&](const std::string& sample) {
      IndexRow r;
      r.sample = sample;
      r.label = e.label;
      r.split = which;
      r.subject = e.subject;
      r.camera = e.camera;
      return r;
    };
    std::vector<IndexRow>& rows = slots[i];
    try {
      for (const auto& seq : load_entry(m, e)) {
        const SpmfImage img = encode_sequence(seq, stats, cfg.out_w, cfg.out_h);
        IndexRow row = base_row(seq.id);
        row.path = (rel_dir / image_filename(m.dataset, seq.id, 0)).generic_string();
        write_png(cfg.out_dir / row.path, img);
        rows.push_back(row);
        if (which != "train") continue;
        for (int r = 1; r <= cfg.replicas; ++r) {
          Rng rng(derive_seed(cfg.seed, seq.id, static_cast<std::uint64_t>(r)));
          IndexRow aug = base_row(seq.id);
          aug.replica = r;
          aug.path = (rel_dir / image_filename(m.dataset, seq.id, r)).generic_string();
          write_png(cfg.out_dir / aug.path, augment_image(img, cfg.augment, rng));
          rows.push_back(aug);
        }
      }
    } catch (const std::exception& ex) {
      rows.clear();
      IndexRow row = base_row(e.id);
      row.error = ex.what();
      rows.push_back(row);
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.jobs, 1)), 1, 64);
  if (jobs == 1 || work.size() < 2) {
    for (std::size_t i = 0; i < work.size(); ++i) encode_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < std::min(jobs, work.size()); ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < work.size(); i = next++) encode_one(i);
      });
    }
  }

  EncodeReport report;
  for (auto& slot : slots) {
    for (auto& row : slot) {
      if (row.ok()) {
        ++report.image_count;
      } else {
        ++report.error_count;
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.index_path = cfg.out_dir / "index.jsonl";
  write_index(report.index_path, report.rows);
  return report;
}

}  // namespace spmf
