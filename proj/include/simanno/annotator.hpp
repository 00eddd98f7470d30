#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simanno/keyword_store.hpp"
#include "simanno/lexicon.hpp"
#include "simanno/semantic_analysis.hpp"
#include "simanno/vector_index.hpp"

namespace simanno {

struct ConceptDef {
  std::string name;
  std::vector<SynsetId> synsets;
};

/// Concept vocabulary, validated against a lexicon.
class ConceptSet {
 public:
  ConceptSet() = default;

  /// Concepts file: `C\t<name>\t<synset>(,<synset>)*`.
  static ConceptSet load(const std::filesystem::path& path, const Lexicon& lexicon);
  /// Names are lowercased. Throws on duplicates, empty synset lists, or
  /// synsets the lexicon does not declare.
  static ConceptSet from_defs(std::vector<ConceptDef> defs, const Lexicon& lexicon);

  void save(const std::filesystem::path& path) const;

  const ConceptDef* find(const std::string& name) const;
  /// Throws std::invalid_argument naming the unknown concept.
  const ConceptDef& at(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }

  /// Sorted by name.
  std::span<const ConceptDef> all() const noexcept { return defs_; }
  std::size_t size() const noexcept { return defs_.size(); }

 private:
  std::vector<ConceptDef> defs_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

struct Query {
  ImageId id;
  std::vector<float> feature;
  std::vector<std::string> candidates;
};

struct ScoredConcept {
  std::string name;
  double score = 0.0;

  friend bool operator==(const ScoredConcept&, const ScoredConcept&) = default;
};

struct Annotation {
  ImageId id;
  std::vector<ScoredConcept> ranked;  // descending score, ties by name
  bool no_signal = false;             // no neighbor keyword matched the lexicon
  std::size_t missing_keywords = 0;   // neighbors without a keyword record
};

/// Every candidate scored by the max propagated score over its linked
/// synsets (0 when none is in the graph). Descending score, ties by name.
std::vector<ScoredConcept> score_concepts(std::span<const RankedSynset> ranked_synsets, const ConceptSet& concepts,
                                          std::span<const std::string> candidates);

/// The first m entries of an already ordered list.
std::vector<ScoredConcept> select_top(std::vector<ScoredConcept> scored, std::size_t m);

/// One searchable reference collection and its keywords.
struct ReferenceSet {
  const VectorIndex* index = nullptr;
  const KeywordStore* keywords = nullptr;
};

struct AnnotatorConfig {
  std::size_t k = 70;  // similar images
  std::size_t m = 5;   // concepts in the output
  AnalysisConfig analysis;

  void validate() const;
};

/// Wall time per pipeline phase, seconds.
struct PhaseTimes {
  double search = 0.0;
  double keywords = 0.0;
  double analysis = 0.0;
};

/// Read-only pipeline: kNN over every reference set, neighbor lists merged by
/// distance, keywords gathered, synsets analyzed, candidates scored, top m.
class Annotator {
 public:
  Annotator(std::vector<ReferenceSet> references, const Lexicon& lexicon, const ConceptSet& concepts,
            AnnotatorConfig config);

  Annotation annotate(const Query& query, PhaseTimes* times = nullptr) const;

  /// Output ordered by query id. `threads` 0 means hardware concurrency.
  /// `times`, when given, receives one entry per output annotation.
  std::vector<Annotation> annotate_batch(std::span<const Query> queries, std::size_t threads = 1,
                                         std::vector<PhaseTimes>* times = nullptr) const;

  /// The k nearest references over all sets: ascending distance, then id,
  /// then set order. Each entry remembers its set.
  struct MergedNeighbor {
    Neighbor neighbor;
    std::size_t set = 0;
  };
  std::vector<MergedNeighbor> merge_neighbors(const std::vector<NeighborList>& per_set) const;

  const AnnotatorConfig& config() const noexcept { return config_; }

 private:
  Annotation finish(const Query& query, const std::vector<NeighborList>& per_set, PhaseTimes* times) const;
  void check_query(const Query& query) const;

  std::vector<ReferenceSet> references_;
  const Lexicon& lexicon_;
  const ConceptSet& concepts_;
  AnnotatorConfig config_;
};

Annotation annotate(const Query& query, std::span<const ReferenceSet> references, const Lexicon& lexicon,
                    const ConceptSet& concepts, const AnnotatorConfig& config);

/// `<image_id>\t<name>(,<name>)*`; names lowercased.
std::map<ImageId, std::vector<std::string>> read_candidate_lists(const std::filesystem::path& path);
void write_candidate_lists(const std::filesystem::path& path,
                           const std::map<ImageId, std::vector<std::string>>& lists);

/// Output lines `<image_id>\t<name>:<score>(,<name>:<score>)*`, six decimals.
std::string format_annotation(const Annotation& annotation);
void write_annotations(const std::filesystem::path& path, std::span<const Annotation> annotations);
/// Throws ParseError with the line number on malformed lines or duplicate ids.
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

}  // namespace simanno
