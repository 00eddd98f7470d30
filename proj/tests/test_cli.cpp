#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "simanno/annotator.hpp"
#include "simanno/synth_corpus.hpp"
#include "simanno/vector_index.hpp"
#include "test_support.hpp"

namespace simanno {
namespace {

using testing::read_bytes;
using testing::TempDir;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "simanno");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class CliCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = run({"generate", "--out", dir.path().string(), "--seed", "4", "--dim", "16", "--concepts", "10",
                        "--refs-per-concept", "20", "--queries", "40", "--sigma", "0.01", "--label-noise", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    conf = (dir / "engine.conf").string();
  }

  TempDir dir;
  std::string conf;
};

TEST_F(CliCorpus, BuildWritesLoadableIndex) {
  const auto r = run({"build", "-c", conf});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("count 200"), std::string::npos);
  EXPECT_NE(r.out.find("dim 16"), std::string::npos);
  IndexConfig c;
  c.dim = 16;
  EXPECT_EQ(load_index(dir / "features.idx", c).size(), 200u);
}

TEST_F(CliCorpus, RebuildIsByteIdentical) {
  ASSERT_EQ(run({"build", "-c", conf, "--index-mode", "perm-prefix", "--seed", "3"}).code, 0);
  const auto first = read_bytes(dir / "features.idx");
  ASSERT_EQ(run({"build", "-c", conf, "--index-mode", "perm-prefix", "--seed", "3"}).code, 0);
  EXPECT_EQ(first, read_bytes(dir / "features.idx"));
}

TEST_F(CliCorpus, MissingFeatureFileNamesPath) {
  const auto r = run({"build", "-c", conf, "--features", (dir / "nope.fvec").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("nope.fvec"), std::string::npos);
}

TEST_F(CliCorpus, AnnotateWritesOneLinePerQuery) {
  const auto r = run({"annotate", "-c", conf});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto annotations = read_annotations(dir / "annotations.tsv");
  EXPECT_EQ(annotations.size(), 40u);
  for (const auto& a : annotations) EXPECT_LE(a.ranked.size(), 5u);
  EXPECT_EQ(count_lines(read_bytes(dir / "annotations.tsv")), 40u);
  for (const char* phase : {"feature load", "search", "keyword fetch", "analysis"}) {
    EXPECT_NE(r.out.find(phase), std::string::npos) << phase;
  }
}

TEST_F(CliCorpus, AnnotateTwiceIsIdentical) {
  ASSERT_EQ(run({"annotate", "-c", conf, "--output", (dir / "a.tsv").string()}).code, 0);
  ASSERT_EQ(run({"annotate", "-c", conf, "--output", (dir / "b.tsv").string(), "--threads", "3"}).code, 0);
  EXPECT_EQ(read_bytes(dir / "a.tsv"), read_bytes(dir / "b.tsv"));
}

TEST_F(CliCorpus, FlagsOverrideConfig) {
  ASSERT_EQ(run({"annotate", "-c", conf, "--m", "2", "--preset", "mpeg7-style"}).code, 0);
  for (const auto& a : read_annotations(dir / "annotations.tsv")) EXPECT_EQ(a.ranked.size(), 2u);
  ASSERT_EQ(run({"annotate", "-c", conf, "--preset", "mpeg7-style"}).code, 0);
  for (const auto& a : read_annotations(dir / "annotations.tsv")) EXPECT_EQ(a.ranked.size(), 7u);
}

TEST_F(CliCorpus, EvaluatePerfectRun) {
  // k below the 20 references per cluster keeps every neighbor in-cluster.
  ASSERT_EQ(run({"annotate", "-c", conf, "--k", "15"}).code, 0);
  const auto r = run({"evaluate", "-c", conf});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("MF_s=100.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("MAP_s=100.0"), std::string::npos);
}

TEST_F(CliCorpus, EvaluateSubset) {
  ASSERT_EQ(run({"annotate", "-c", conf}).code, 0);
  testing::write_text(dir / "subset.txt", "# two images\nq00\nq01\n");
  const auto r = run({"evaluate", "-c", conf, "--subset", (dir / "subset.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("samples_scored=2"), std::string::npos) << r.out;
}

TEST_F(CliCorpus, AblationPrintsFourLevels) {
  const auto r = run({"evaluate", "-c", conf, "--ablation"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 5u);  // header plus one row per level
  for (const char* level : {"frequency-only", "multi-sense", "+hyper/hypo", "+mero/holo"}) {
    EXPECT_NE(r.out.find(level), std::string::npos) << level;
  }
}

TEST_F(CliCorpus, MalformedAnnotationFileReportsLine) {
  testing::write_text(dir / "bad.tsv", "q00\tconcept00:1.0\nq01 concept01:1.0\n");
  const auto r = run({"evaluate", "-c", conf, "--annotations", (dir / "bad.tsv").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;
}

TEST_F(CliCorpus, BenchPrintsFourPhases) {
  const auto r = run({"bench", "-c", conf, "--limit", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("queries/s"), std::string::npos);
  for (const char* phase : {"feature load", "search", "keyword fetch", "analysis"}) {
    EXPECT_NE(r.out.find(phase), std::string::npos) << phase;
  }
  EXPECT_NE(r.out.find("p99"), std::string::npos);
}

TEST_F(CliCorpus, FailedRunLeavesNoOutput) {
  const auto r = run({"annotate", "-c", conf, "--lexicon", (dir / "missing.tsv").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(std::filesystem::exists(dir / "annotations.tsv"));
}

TEST(Cli, UnknownSubcommandFails) { EXPECT_NE(run({"frobnicate"}).code, 0); }

TEST(Cli, BadFlagValueFails) {
  const auto r = run({"annotate", "--k", "many"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("--k"), std::string::npos) << r.err;
}

TEST(Cli, GenerateIsDeterministic) {
  TempDir a, b;
  ASSERT_EQ(run({"generate", "--out", a.path().string(), "--concepts", "5", "--refs-per-concept", "4", "--queries",
                 "6", "--labels-per-image", "2"})
                .code,
            0);
  ASSERT_EQ(run({"generate", "--out", b.path().string(), "--concepts", "5", "--refs-per-concept", "4", "--queries",
                 "6", "--labels-per-image", "2"})
                .code,
            0);
  EXPECT_EQ(read_bytes(a / "keywords.tsv"), read_bytes(b / "keywords.tsv"));
  EXPECT_EQ(read_bytes(a / "features.fvec"), read_bytes(b / "features.fvec"));
}

}  // namespace
}  // namespace simanno
