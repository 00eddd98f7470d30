#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "simanno/annotator.hpp"

namespace simanno {

using ConceptNameSet = std::set<std::string>;
/// Relevant concepts per image.
using GroundTruth = std::map<ImageId, ConceptNameSet>;
using CandidateLists = std::map<ImageId, std::vector<std::string>>;

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Precision, recall and F of one predicted set against a nonempty truth set.
PRF sample_prf(const ConceptNameSet& predicted, const ConceptNameSet& truth);

/// (1/|truth|) * sum over hit positions i (1-based) of hits-so-far / i.
double average_precision(std::span<const std::string> ranked, const ConceptNameSet& truth);

struct ConceptCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Counts over the samples that have a truth entry and whose candidate list
/// contains `concept_name` (every sample when `candidates` is null).
ConceptCounts count_concept(std::span<const Annotation> annotations, const GroundTruth& truth,
                            const std::string& concept_name, const CandidateLists* candidates = nullptr);

/// nullopt when the concept has no relevant sample (TP + FN == 0).
std::optional<PRF> concept_prf(const ConceptCounts& counts);

struct ConceptRow {
  std::string name;
  ConceptCounts counts;
  std::optional<PRF> prf;  // empty when skipped
};

struct MetricsReport {
  double mp_s = 0.0, mr_s = 0.0, mf_s = 0.0, map_s = 0.0;
  double mp_c = 0.0, mr_c = 0.0, mf_c = 0.0;

  std::size_t samples_scored = 0;
  std::size_t samples_empty_truth = 0;  // skipped
  std::size_t samples_without_truth = 0;  // skipped
  std::size_t concepts_scored = 0;
  std::size_t concepts_skipped = 0;  // no relevant sample
  std::vector<ConceptRow> per_concept;

  /// value * 100 rounded to one decimal.
  static double percent(double value);

  std::string to_table() const;
  /// `key=value` lines with percentages, then counts.
  std::string to_key_values() const;
};

/// Sample metrics are means over annotated images with a nonempty truth set;
/// concept metrics are means over concepts with at least one relevant sample.
/// Throws std::invalid_argument when an annotation names an unknown concept.
MetricsReport evaluate(std::span<const Annotation> annotations, const GroundTruth& truth, const ConceptSet& concepts,
                       const CandidateLists* candidates = nullptr);

/// `<image_id>\t<name>(,<name>)*`, an empty list allowed. Names must resolve
/// against `concepts`.
GroundTruth read_ground_truth(const std::filesystem::path& path, const ConceptSet& concepts);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);

}  // namespace simanno
