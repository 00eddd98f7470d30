#include <gtest/gtest.h>

#include "simanno/engine_config.hpp"
#include "simanno/errors.hpp"
#include "test_support.hpp"

namespace simanno {
namespace {

EngineConfig from_text(const std::string& text, const std::filesystem::path& base = {}) {
  return resolve_config(parse_config_entries(text, "test.conf"), "test.conf", base);
}

TEST(EngineConfig, DefaultsMatchAnalysisDefaults) {
  const EngineConfig c;
  EXPECT_EQ(c.k, 70u);
  EXPECT_EQ(c.m, 5u);
  EXPECT_EQ(c.analysis.s, 7u);
  EXPECT_EQ(c.analysis.n, 100u);
  EXPECT_EQ(c.analysis.relation_set, RelationSet::all());
}

TEST(EngineConfig, Presets) {
  EngineConfig c;
  apply_preset(c, "mpeg7-style");
  EXPECT_EQ(c.k, 25u);
  EXPECT_EQ(c.analysis.n, 200u);
  EXPECT_EQ(c.m, 7u);
  EXPECT_EQ(c.analysis.s, 7u);
  EXPECT_EQ(c.analysis.relation_set, RelationSet::all());
  apply_preset(c, "decaf-style");
  EXPECT_EQ(c.k, 70u);
  EXPECT_EQ(c.analysis.n, 100u);
  EXPECT_EQ(c.m, 5u);
  EXPECT_THROW(apply_preset(c, "fast"), std::invalid_argument);
}

TEST(EngineConfig, KeysOverridePresetRegardlessOfOrder) {
  const auto c = from_text("k = 12\npreset = mpeg7-style\n");
  EXPECT_EQ(c.k, 12u);
  EXPECT_EQ(c.m, 7u);
}

TEST(EngineConfig, ParsesEveryKey) {
  const auto c = from_text(
      "# comment\n"
      "dim = 16\nindex_mode = perm-prefix\nnum_pivots = 32\nprefix_len = 4\ncandidate_budget = 900\n"
      "seed = 9\nk = 10\nm = 3\ns = 2\nn = 50\nneighbor_weighting = reciprocal-rank\n"
      "relations = hypernym,hyponym\nlambda.hypernym = 2.5\nlambda.mero = 0.5\nalpha = 0.25\n"
      "expansion_depth = 0\nmax_iters = 40\ntol = 1e-6\nthreads = 3\n"
      "features = a.fvec, b.fvec\nkeywords = a.tsv,b.tsv\nlexicon = lex.tsv\nconcepts = c.tsv\n"
      "queries = q.fvec\ncandidates = cand.tsv\ntruth = t.tsv\noutput = out.tsv\n",
      "/data");
  EXPECT_EQ(c.index.dim, 16u);
  EXPECT_EQ(c.index.mode, IndexMode::perm_prefix);
  EXPECT_EQ(c.index.num_pivots, 32u);
  EXPECT_EQ(c.index.prefix_len, 4u);
  EXPECT_EQ(c.index.candidate_budget, 900u);
  EXPECT_EQ(c.index.rng_seed, 9u);
  EXPECT_EQ(c.k, 10u);
  EXPECT_EQ(c.m, 3u);
  EXPECT_EQ(c.analysis.s, 2u);
  EXPECT_EQ(c.analysis.n, 50u);
  EXPECT_EQ(c.analysis.neighbor_weighting, NeighborWeighting::reciprocal_rank);
  EXPECT_EQ(c.analysis.relation_set, (RelationSet{RelationType::hypernym, RelationType::hyponym}));
  EXPECT_EQ(c.analysis.lambda_for(RelationType::hypernym), 2.5);
  EXPECT_EQ(c.analysis.lambda_for(RelationType::meronym), 0.5);
  EXPECT_EQ(c.analysis.lambda_for(RelationType::holonym), 1.0);
  EXPECT_EQ(c.analysis.alpha, 0.25);
  EXPECT_EQ(c.analysis.expansion_depth, 0u);
  EXPECT_EQ(c.analysis.max_iters, 40u);
  EXPECT_EQ(c.analysis.tol, 1e-6);
  EXPECT_EQ(c.threads, 3u);
  ASSERT_EQ(c.features.size(), 2u);
  EXPECT_EQ(c.features[1], std::filesystem::path("/data/b.fvec"));
  EXPECT_EQ(c.keywords.size(), 2u);
  EXPECT_EQ(c.lexicon, std::filesystem::path("/data/lex.tsv"));
  EXPECT_EQ(c.output, std::filesystem::path("/data/out.tsv"));
}

TEST(EngineConfig, ErrorsCarryLineNumbers) {
  for (const auto* text : {"k = 5\nbogus = 1\n", "k = 5\nk = five\n", "k = 5\njust words\n",
                           "k = 5\nlambda.sibling = 1\n", "k = 5\npreset = none\n"}) {
    try {
      from_text(text);
      FAIL() << "expected ParseError for: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << text;
    }
  }
}

TEST(EngineConfig, ValidateRejectsZeroKAndM) {
  auto c = from_text("k = 0\n");
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = from_text("m = 0\n");
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = from_text("features = a\nkeywords = a,b\n");
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(EngineConfig, CanonicalTextRoundTrips) {
  const auto c = from_text("dim = 8\nk = 11\nrelations = mero\nlambda.holonym = 0.75\nfeatures = /x/a.fvec\n");
  const auto again = from_text(to_config_text(c));
  EXPECT_EQ(to_config_text(again), to_config_text(c));
  EXPECT_EQ(again.k, 11u);
  EXPECT_EQ(again.analysis.relation_set, RelationSet{RelationType::meronym});
}

TEST(EngineConfig, LoadResolvesRelativeToFile) {
  testing::TempDir dir;
  testing::write_text(dir / "e.conf", "lexicon = lex.tsv\n");
  const auto c = load_engine_config(dir / "e.conf");
  EXPECT_EQ(c.lexicon, dir.path() / "lex.tsv");
  EXPECT_THROW(load_engine_config(dir / "missing.conf"), IoError);
}

}  // namespace
}  // namespace simanno
