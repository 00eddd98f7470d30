#include <gtest/gtest.h>

#include "simanno/engine_config.hpp"
#include "simanno/feature_file.hpp"
#include "simanno/synth_corpus.hpp"
#include "test_support.hpp"

namespace simanno {
namespace {

using testing::read_bytes;
using testing::TempDir;

SynthConfig small() {
  SynthConfig c;
  c.dim = 8;
  c.num_concepts = 6;
  c.refs_per_concept = 10;
  c.num_queries = 12;
  c.labels_per_image = 2;
  c.synonym_rate = 0.2;
  c.hyponym_rate = 0.2;
  c.part_rate = 0.1;
  return c;
}

const char* kFiles[] = {SynthFiles::features, SynthFiles::keywords,   SynthFiles::lexicon, SynthFiles::concepts,
                        SynthFiles::queries,  SynthFiles::candidates, SynthFiles::truth,   SynthFiles::config};

TEST(Synth, SameSeedByteIdentical) {
  TempDir a, b;
  generate(small(), a.path());
  generate(small(), b.path());
  for (const char* f : kFiles) EXPECT_EQ(read_bytes(a / f), read_bytes(b / f)) << f;
}

TEST(Synth, DifferentSeedDiffers) {
  TempDir a, b;
  auto c = small();
  generate(c, a.path());
  c.rng_seed = 2;
  generate(c, b.path());
  EXPECT_NE(read_bytes(a / SynthFiles::features), read_bytes(b / SynthFiles::features));
}

TEST(Synth, EveryFileParses) {
  TempDir dir;
  const auto cfg = small();
  generate(cfg, dir.path());
  const auto features = read_features(dir / SynthFiles::features);
  EXPECT_EQ(features.vectors.size(), cfg.num_concepts * cfg.refs_per_concept);
  EXPECT_EQ(features.dim, cfg.dim);
  EXPECT_EQ(KeywordStore::load(dir / SynthFiles::keywords).size(), features.vectors.size());
  const auto lex = Lexicon::load(dir / SynthFiles::lexicon);
  const auto concepts = ConceptSet::load(dir / SynthFiles::concepts, lex);
  EXPECT_EQ(concepts.size(), cfg.num_concepts);
  EXPECT_EQ(read_features(dir / SynthFiles::queries).vectors.size(), cfg.num_queries);
  EXPECT_EQ(read_candidate_lists(dir / SynthFiles::candidates).size(), cfg.num_queries);
  const auto truth = read_ground_truth(dir / SynthFiles::truth, concepts);
  ASSERT_EQ(truth.size(), cfg.num_queries);
  for (const auto& [id, names] : truth) EXPECT_EQ(names.size(), cfg.labels_per_image);
  const auto engine = load_engine_config(dir / SynthFiles::config);
  EXPECT_EQ(engine.lexicon, dir / SynthFiles::lexicon);
  EXPECT_EQ(engine.preset, "decaf-style");
}

TEST(Synth, LexiconHasHierarchyAndAmbiguity) {
  const auto world = build_world(small());
  const auto lex = Lexicon::parse(world.lexicon_text);
  const auto name = synth_concept_name(0, 6);
  const auto syn = name + ".n.01";
  EXPECT_FALSE(lex.related(syn, RelationSet{RelationType::hypernym}).empty());
  EXPECT_FALSE(lex.related(syn, RelationSet{RelationType::hyponym}).empty());
  EXPECT_FALSE(lex.related(syn, RelationSet{RelationType::meronym}).empty());
  const auto alias = lex.senses("alias00", 7);
  ASSERT_EQ(alias.size(), 2u);
  EXPECT_NE(alias[0], syn);
  EXPECT_EQ(alias[1], syn);
}

TEST(Synth, SharedPrototypesAcrossSizes) {
  auto c = small();
  const auto a = build_world(c);
  c.refs_per_concept = 30;
  c.label_noise = 0.5;
  const auto b = build_world(c);
  ASSERT_EQ(a.queries.size(), b.queries.size());
  for (std::size_t i = 0; i < a.queries.size(); ++i) EXPECT_EQ(a.queries[i].values, b.queries[i].values);
}

TEST(Synth, NoiselessKeywordsAreLabels) {
  auto c = small();
  c.label_noise = 0.0;
  c.synonym_rate = c.hyponym_rate = c.part_rate = 0.0;
  const auto w = build_world(c);
  for (std::size_t r = 0; r < w.keywords.size(); ++r) {
    ASSERT_EQ(w.keywords[r].words.size(), c.labels_per_image);
    EXPECT_EQ(w.keywords[r].words[0], synth_concept_name(r % c.num_concepts, c.num_concepts));
  }
}

TEST(Synth, ValidateRejectsBadConfig) {
  auto c = small();
  c.label_noise = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.num_queries = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.synonym_rate = 0.6;
  c.hyponym_rate = 0.6;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.labels_per_image = c.num_concepts;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace simanno
