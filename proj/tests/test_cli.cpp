#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "spmf_cli.hpp"
#include "test_support.hpp"

namespace spmf {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spmf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, VersionAndHelp) {
  EXPECT_EQ(run({"version"}).out, std::string("spmf ") + cli::kVersion + "\n");
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("train-baseline"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"version", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({"stats"}).code, 2);
}

TEST(Cli, StatsWritesRecord) {
  testing::TempDir dir;
  const auto manifest = testing::write_synth_corpus(dir.path(), 2, 2, 1, 6, 4, 0.01, 1);
  const auto r = run({"stats", "--manifest", manifest.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto stats = parse_stats_record(r.out);
  EXPECT_EQ(stats.sequences, 6u);
  EXPECT_EQ(stats.d_max, compute_corpus_stats(load_manifest(manifest)).stats.d_max);

  const auto file = dir.path() / "stats.txt";
  EXPECT_EQ(run({"stats", "--manifest", manifest.string(), "--out", file.string()}).code, 0);
  EXPECT_EQ(parse_stats_record(read_text_file(file)), stats);
}

TEST(Cli, EncodeWithMissingSourceExitsOne) {
  testing::TempDir dir;
  const auto manifest = testing::write_synth_corpus(dir.path(), 2, 2, 1, 6, 4, 0.01, 1);
  const auto m = load_manifest(manifest);
  fs::remove(m.resolve(m.entries[0]));
  const auto out = dir.path() / "corpus";
  const auto r = run({"encode", "--manifest", manifest.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("1 errors"), std::string::npos);
  EXPECT_NE(r.err.find(m.entries[0].id), std::string::npos);
  const auto rows = read_index(out / "index.jsonl");
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const IndexRow& row) { return !row.ok(); }), 1);
}

TEST(Cli, ParseReportsSequences) {
  testing::TempDir dir;
  const auto manifest = testing::write_synth_corpus(dir.path(), 1, 1, 0, 20, 5, 0.0, 2);
  const auto m = load_manifest(manifest);
  const auto r = run({"parse", "--input", m.resolve(m.entries[0]).string(), "--name", "a05_s02_e01"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("sequences")[0].at("frames"), 5);
  EXPECT_EQ(j.at("sequences")[0].at("label"), 5);

  std::ofstream(dir.path() / "bad.txt") << "1 2 3\n";
  EXPECT_EQ(run({"parse", "--input", (dir.path() / "bad.txt").string()}).code, 1);
}

TEST(Cli, EndToEndSynthEncodeTrainEval) {
  testing::TempDir dir;
  const auto src = dir.path() / "src";
  const auto corpus = dir.path() / "corpus";
  ASSERT_EQ(run({"--seed", "4", "synth", "--out", src.string(), "--classes", "3", "--train-per-class", "10",
                 "--test-per-class", "5", "--noise", "0.01"})
                .code,
            0);
  const auto enc = run({"--seed", "4", "encode", "--manifest", (src / "manifest.json").string(), "--out",
                        corpus.string(), "--replicas", "1", "--jobs", "2"});
  ASSERT_EQ(enc.code, 0) << enc.err;
  EXPECT_EQ(read_index(corpus / "index.jsonl").size(), 30u * 2u + 15u);
  EXPECT_NO_THROW(parse_stats_record(read_text_file(corpus / "stats.txt")));

  const auto model = dir.path() / "model.bin";
  const auto tr = run({"train-baseline", "--index", (corpus / "index.jsonl").string(), "--out", model.string(),
                       "--epochs", "30", "--batch-size", "16", "--history", (dir.path() / "h.json").string()});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_TRUE(fs::exists(model.string() + ".json"));
  const auto history = nlohmann::json::parse(read_text_file(dir.path() / "h.json"));
  EXPECT_EQ(history.at("loss").size(), 30u);

  const auto report_path = dir.path() / "eval.json";
  const auto ev = run({"eval", "--model", model.string(), "--index", (corpus / "index.jsonl").string(), "--out",
                       report_path.string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto report = nlohmann::json::parse(read_text_file(report_path));
  EXPECT_EQ(report.at("sample_count"), 15);
  for (const char* key : {"class_labels", "per_class_accuracy", "confusion", "average_accuracy", "overall_accuracy",
                          "excluded_classes"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
}

TEST(Cli, AugmentIsSeeded) {
  testing::TempDir dir;
  SpmfImage img(16, 16);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = {static_cast<std::uint8_t>(i), 0, 0};
  write_png(dir.path() / "in.png", img);
  auto aug = [&](const char* seed, const char* name) {
    const auto path = dir.path() / name;
    EXPECT_EQ(run({"--seed", seed, "augment", "--input", (dir.path() / "in.png").string(), "--output", path.string()})
                  .code,
              0);
    return read_text_file(path);
  };
  EXPECT_EQ(aug("1", "a.png"), aug("1", "b.png"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  testing::TempDir dir;
  std::ofstream(dir.path() / "cfg.ini") << "[synth]\nclasses = 3\ntrain-per-class = 1\ntest-per-class = 1\n";
  const auto cfg = (dir.path() / "cfg.ini").string();
  ASSERT_EQ(run({"--config", cfg, "synth", "--out", (dir.path() / "a").string()}).code, 0);
  EXPECT_EQ(load_manifest(dir.path() / "a" / "manifest.json").entries.size(), 6u);
  ASSERT_EQ(run({"--config", cfg, "synth", "--out", (dir.path() / "b").string(), "--classes", "2"}).code, 0);
  EXPECT_EQ(load_manifest(dir.path() / "b" / "manifest.json").entries.size(), 4u);
}

}  // namespace
}  // namespace spmf
