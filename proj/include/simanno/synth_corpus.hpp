#pragma once

// Seeded synthetic worlds: Gaussian concept clusters with noisy keyword labels,
// a generated lexicon and queries with known ground truth.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simanno/annotator.hpp"
#include "simanno/evaluation.hpp"
#include "simanno/keyword_store.hpp"
#include "simanno/lexicon.hpp"
#include "simanno/vector_index.hpp"

namespace simanno {

struct SynthConfig {
  std::uint64_t rng_seed = 1;
  std::size_t dim = 64;
  std::size_t num_concepts = 20;
  std::size_t refs_per_concept = 100;
  std::size_t num_queries = 200;
  double cluster_noise_sigma = 3.0;
  double label_noise = 0.3;  // chance a keyword is replaced by a wrong concept's lemma
  std::size_t lexicon_depth = 2;  // hyponym chain length below each concept

  /// Concepts each image is labeled with: its cluster's window of
  /// consecutive concepts (mod num_concepts).
  std::size_t labels_per_image = 5;
  std::size_t num_groups = 4;  // hypernyms grouping the concepts
  // Chance that a correct keyword is written as an ambiguous synonym, a
  // hyponym lemma or a part lemma instead of the concept lemma.
  double synonym_rate = 0.0;
  double hyponym_rate = 0.0;
  double part_rate = 0.0;

  void validate() const;
};

struct SynthWorld {
  std::size_t dim = 0;
  std::vector<FeatureVector> references;
  std::vector<KeywordRecord> keywords;
  std::string lexicon_text;
  std::vector<ConceptDef> concepts;
  std::vector<FeatureVector> queries;
  CandidateLists candidates;
  GroundTruth truth;
};

/// Fixed file names inside a generated corpus directory.
struct SynthFiles {
  static constexpr const char* features = "features.fvec";
  static constexpr const char* keywords = "keywords.tsv";
  static constexpr const char* lexicon = "lexicon.tsv";
  static constexpr const char* concepts = "concepts.tsv";
  static constexpr const char* queries = "queries.fvec";
  static constexpr const char* candidates = "candidates.tsv";
  static constexpr const char* truth = "truth.tsv";
  static constexpr const char* config = "engine.conf";
};

/// Lemma of concept i, e.g. "concept07".
std::string synth_concept_name(std::size_t i, std::size_t num_concepts);

/// Deterministic per config. Prototypes, references and queries draw from
/// separate streams, so worlds differing only in sizes or noise share
/// prototypes.
SynthWorld build_world(const SynthConfig& config);

/// Writes every file plus an engine.conf pointing at them.
void write_world(const SynthWorld& world, const std::filesystem::path& dir);

inline void generate(const SynthConfig& config, const std::filesystem::path& dir) {
  write_world(build_world(config), dir);
}

}  // namespace simanno
