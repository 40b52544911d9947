#pragma once

// Command-line front end. Kept in a header so the test suite can drive
// run_cli() in-process.
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spmf/spmf.hpp"

namespace spmf::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2 };

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline nlohmann::json report_json(const ValidationReport& r) {
  auto list = [](const std::vector<Violation>& v) {
    auto a = nlohmann::json::array();
    for (const auto& x : v) a.push_back({{"frame", x.frame}, {"rule", x.rule}});
    return a;
  };
  return {{"violations", list(r.violations)}, {"warnings", list(r.warnings)}};
}

inline void add_augment_flags(CLI::App* cmd, AugmentConfig& cfg) {
  cmd->add_option("--crop-fraction", cfg.crop_fraction, "Side fraction kept by the random crop")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--flip-probability", cfg.flip_probability, "Probability of a horizontal flip")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--gaussian-sigma", cfg.gaussian_sigma, "Gaussian blur sigma in pixels (0 = off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Skeleton sequence to SPMF image encoder, corpus builder and linear baseline", "spmf"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags take precedence)");

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Global seed for every stochastic stage")->capture_default_str();

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Parse one skeleton file and report its validation result");
  std::string parse_input, parse_format = "msr", parse_name;
  MsrFormatConfig msr_cfg;
  NtuFormatConfig ntu_cfg;
  parse_cmd->add_option("--input", parse_input, "Skeleton file")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--format", parse_format, "msr or ntu")
      ->check(CLI::IsMember({"msr", "ntu"}))
      ->capture_default_str();
  parse_cmd->add_option("--name", parse_name, "Sample name for label/subject parsing (default: file name)");
  parse_cmd->add_option("--joints", msr_cfg.joints_per_frame, "MSR joints per frame")->capture_default_str();
  parse_cmd->add_option("--values-per-row", msr_cfg.values_per_row, "MSR values per row")->capture_default_str();
  parse_cmd->add_option("--ntu-joints", ntu_cfg.joints_per_body, "NTU joints per body")->capture_default_str();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Compute the corpus distance range (d_max)");
  std::string stats_manifest, stats_out, stats_scope = "whole";
  stats_cmd->add_option("--manifest", stats_manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", stats_out, "Output stats record (default: stdout)");
  stats_cmd->add_option("--stats-scope", stats_scope, "whole or train")
      ->check(CLI::IsMember({"whole", "train"}))
      ->capture_default_str();

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Encode a manifest into a PNG corpus with a JSON-lines index");
  std::string enc_manifest, enc_out, enc_stats, enc_scope = "whole";
  EncodeConfig enc_cfg;
  encode_cmd->add_option("--manifest", enc_manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  encode_cmd->add_option("--out", enc_out, "Output corpus directory")->required();
  encode_cmd->add_option("--stats", enc_stats, "Stats record to use (default: compute from the manifest)")
      ->check(CLI::ExistingFile);
  encode_cmd->add_option("--stats-scope", enc_scope, "whole or train, when computing stats")
      ->check(CLI::IsMember({"whole", "train"}))
      ->capture_default_str();
  encode_cmd->add_option("--width", enc_cfg.out_w, "Output image width")->check(CLI::PositiveNumber)->capture_default_str();
  encode_cmd->add_option("--height", enc_cfg.out_h, "Output image height")->check(CLI::PositiveNumber)->capture_default_str();
  encode_cmd->add_option("--replicas", enc_cfg.replicas, "Augmented copies per train sample (msr profile only)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  encode_cmd->add_option("--jobs", enc_cfg.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  detail::add_augment_flags(encode_cmd, enc_cfg.augment);

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Apply crop/flip/blur augmentation to one PNG");
  std::string aug_in, aug_out, aug_sample;
  AugmentConfig aug_cfg;
  aug_cmd->add_option("--input", aug_in, "Input PNG")->required()->check(CLI::ExistingFile);
  aug_cmd->add_option("--output", aug_out, "Output PNG")->required();
  aug_cmd->add_option("--sample-id", aug_sample, "Id mixed into the seed (default: input file name)");
  detail::add_augment_flags(aug_cmd, aug_cfg);

  // train-baseline
  auto* train_cmd = app.add_subcommand("train-baseline", "Train the linear softmax baseline on an encoded corpus");
  std::string train_index, train_out, train_split = "train", train_history;
  TrainConfig train_cfg;
  train_cmd->add_option("--index", train_index, "Corpus index.jsonl")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Model checkpoint path")->required();
  train_cmd->add_option("--split", train_split, "Index split to train on")->capture_default_str();
  train_cmd->add_option("--history", train_history, "Write per-epoch loss history (JSON)");
  train_cmd->add_option("--epochs", train_cfg.epochs, "Epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--batch-size", train_cfg.batch_size, "Mini-batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.learning_rate, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--beta1", train_cfg.beta1, "Adam beta1")->capture_default_str();
  train_cmd->add_option("--beta2", train_cfg.beta2, "Adam beta2")->capture_default_str();
  train_cmd->add_option("--epsilon", train_cfg.epsilon, "Adam epsilon")->capture_default_str();
  train_cmd->add_option("--halving-period", train_cfg.lr_halving_period, "Epochs between learning-rate halvings")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a baseline checkpoint on one split of a corpus");
  std::string eval_model, eval_index, eval_split = "test", eval_out;
  eval_cmd->add_option("--model", eval_model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--index", eval_index, "Corpus index.jsonl")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", eval_split, "Index split to evaluate")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Write the report as JSON");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic MSR-layout corpus and its manifest");
  std::string synth_out;
  int synth_classes = 6, synth_train = 60, synth_test = 30, synth_joints = 20, synth_frames = 20;
  double synth_noise = 0.02;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--classes", synth_classes, "Action classes")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--train-per-class", synth_train, "Train sequences per class")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--test-per-class", synth_test, "Test sequences per class")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--joints", synth_joints, "Joints per frame")->check(CLI::Range(2, 64))->capture_default_str();
  synth_cmd->add_option("--frames", synth_frames, "Frames per sequence")->check(CLI::Range(2, 10000))->capture_default_str();
  synth_cmd->add_option("--noise", synth_noise, "Gaussian joint noise (sigma)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  auto* version_cmd = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (version_cmd->parsed()) {
      out << "spmf " << kVersion << '\n';
      return kOk;
    }

    if (parse_cmd->parsed()) {
      const std::filesystem::path path(parse_input);
      const std::string name = parse_name.empty() ? path.filename().string() : parse_name;
      const std::string text = read_text_file(path);
      std::vector<SkeletonSequence> seqs;
      if (parse_format == "msr") {
        seqs.push_back(parse_msr(text, msr_cfg, name, path.string()));
      } else {
        seqs = parse_ntu(text, ntu_cfg, name, path.string());
      }
      auto arr = nlohmann::json::array();
      bool clean = true;
      for (const auto& s : seqs) {
        const auto report = validate_sequence(s);
        clean = clean && report.ok();
        arr.push_back({{"id", s.id},
                       {"body_id", s.body_id},
                       {"frames", s.frame_count()},
                       {"joints", s.joint_count},
                       {"label", s.label},
                       {"subject", s.subject_id},
                       {"camera", s.camera_id},
                       {"validation", detail::report_json(report)}});
      }
      out << nlohmann::json{{"sequences", arr}}.dump(2) << '\n';
      return clean ? kOk : kDataError;
    }

    if (stats_cmd->parsed()) {
      const auto manifest = load_manifest(stats_manifest);
      const auto result =
          compute_corpus_stats(manifest, stats_scope == "train" ? StatsScope::train : StatsScope::whole);
      for (const auto& e : result.errors) err << "sample " << e.sample << ": " << e.message << '\n';
      const std::string record = to_record(result.stats);
      if (stats_out.empty()) {
        out << record;
      } else {
        detail::write_file(stats_out, record);
      }
      return result.errors.empty() ? kOk : kDataError;
    }

    if (encode_cmd->parsed()) {
      const auto manifest = load_manifest(enc_manifest);
      DistanceStats stats;
      if (!enc_stats.empty()) {
        stats = parse_stats_record(read_text_file(enc_stats));
      } else {
        const auto computed =
            compute_corpus_stats(manifest, enc_scope == "train" ? StatsScope::train : StatsScope::whole);
        for (const auto& e : computed.errors) err << "stats: sample " << e.sample << ": " << e.message << '\n';
        stats = computed.stats;
      }
      enc_cfg.out_dir = enc_out;
      enc_cfg.seed = seed;
      enc_cfg.augment.seed = seed;
      const auto report = encode_corpus(manifest, stats, enc_cfg);
      detail::write_file(std::filesystem::path(enc_out) / "stats.txt", to_record(stats));
      for (const auto& r : report.rows) {
        if (!r.ok()) err << "sample " << r.sample << ": " << r.error << '\n';
      }
      out << "encoded " << report.image_count << " images, " << report.error_count << " errors; index "
          << report.index_path.generic_string() << '\n';
      return report.error_count == 0 ? kOk : kDataError;
    }

    if (aug_cmd->parsed()) {
      const auto img = read_png(aug_in);
      aug_cfg.seed = seed;
      const std::string id = aug_sample.empty() ? std::filesystem::path(aug_in).filename().string() : aug_sample;
      Rng rng(derive_seed(seed, id, 1));
      write_png(aug_out, augment_image(img, aug_cfg, rng));
      return kOk;
    }

    if (train_cmd->parsed()) {
      train_cfg.seed = seed;
      const auto samples = load_split_samples(train_index, train_split);
      if (samples.empty()) throw DataError("no '" + train_split + "' samples in " + train_index);
      const auto result = train(samples, distinct_labels(samples), train_cfg);
      // Image geometry is not recoverable from the flat vector; record it from the first image.
      const auto rows = read_index(train_index);
      std::size_t w = 0, h = 0;
      for (const auto& r : rows) {
        if (r.ok()) {
          const auto img = read_png(std::filesystem::path(train_index).parent_path() / r.path);
          w = img.width;
          h = img.height;
          break;
        }
      }
      save_model(train_out, result.model, train_cfg, w, h);
      if (!train_history.empty()) {
        detail::write_file(train_history, nlohmann::json{{"loss", result.loss_history}}.dump(2) + "\n");
      }
      out << "trained " << result.model.class_count() << " classes on " << samples.size() << " samples; final loss "
          << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << '\n';
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const auto model = load_model(eval_model);
      const auto samples = load_split_samples(eval_index, eval_split);
      if (samples.empty()) throw DataError("no '" + eval_split + "' samples in " + eval_index);
      const auto report = evaluate(model, samples);
      out << confusion_table(report);
      if (!eval_out.empty()) detail::write_file(eval_out, to_json(report).dump(2) + "\n");
      return kOk;
    }

    if (synth_cmd->parsed()) {
      const std::filesystem::path dir(synth_out);
      std::filesystem::create_directories(dir / "skeletons");
      const auto templates = make_synth_templates(synth_classes, synth_joints, synth_noise, seed);
      MsrFormatConfig cfg;
      cfg.joints_per_frame = synth_joints;
      DatasetManifest m;
      m.dataset = "synth";
      m.format = SourceFormat::msr;
      m.msr = cfg;
      m.protocol = Protocol::custom;
      for (const auto& t : templates) {
        for (int i = 0; i < synth_train + synth_test; ++i) {
          char id[64];
          std::snprintf(id, sizeof(id), "a%02d_s%02d_e%02d", t.class_id, i + 1, 1);
          const auto seq = synth_sequence(t, synth_frames, derive_seed(seed, id));
          const std::string rel = std::string("skeletons/") + id + "_skeleton.txt";
          detail::write_file(dir / rel, serialize_msr(seq, cfg));
          m.entries.push_back({id, rel, t.class_id, i + 1, 0});
          (i < synth_train ? m.split.train_ids : m.split.test_ids).push_back(id);
        }
      }
      detail::write_file(dir / "manifest.json", to_json(m).dump(2) + "\n");
      out << "wrote " << m.entries.size() << " sequences; manifest " << (dir / "manifest.json").generic_string() << '\n';
      return kOk;
    }
  } catch (const ManifestError& e) {
    err << "manifest error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace spmf::cli
