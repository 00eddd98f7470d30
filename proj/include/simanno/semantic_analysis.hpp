#pragma once

// Neighbor keywords -> weighted words -> candidate synsets -> relation graph
// -> propagated relevance.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "simanno/keyword_store.hpp"
#include "simanno/lexicon.hpp"

namespace simanno {

enum class NeighborWeighting { uniform, reciprocal_rank };

std::string to_string(NeighborWeighting weighting);
NeighborWeighting parse_neighbor_weighting(const std::string& text);

struct AnalysisConfig {
  std::size_t s = 7;    // max synsets per word
  std::size_t n = 100;  // candidate synsets entering the graph
  NeighborWeighting neighbor_weighting = NeighborWeighting::uniform;
  RelationSet relation_set = RelationSet::all();
  std::array<double, 4> lambda = {1.0, 1.0, 1.0, 1.0};  // indexed by RelationType
  double alpha = 0.5;                                    // restart weight
  unsigned expansion_depth = 1;                          // 0 or 1
  std::size_t max_iters = 100;
  double tol = 1e-9;

  double lambda_for(RelationType t) const { return lambda[static_cast<std::size_t>(t)]; }
  void set_lambda(RelationType t, double value) { lambda[static_cast<std::size_t>(t)] = value; }

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct WeightedWord {
  std::string word;
  double weight = 0.0;

  friend bool operator==(const WeightedWord&, const WeightedWord&) = default;
};

struct CandidateSynset {
  SynsetId id;
  SynsetIndex index = 0;
  double p0 = 0.0;
  double score = 0.0;
};

struct GraphEdge {
  std::size_t from;  // node positions
  RelationType type;
  std::size_t to;
};

struct SynsetGraph {
  std::vector<CandidateSynset> nodes;
  std::vector<GraphEdge> edges;
  std::vector<double> restart;  // p0 normalized to sum 1
};

struct PropagationStats {
  std::size_t iterations = 0;
  bool converged = false;
  double final_change = 0.0;          // L1 change of the last iteration
  double max_mass_deviation = 0.0;    // max over iterations of |sum(p) - 1|
};

struct RankedSynset {
  SynsetId id;
  double score = 0.0;

  friend bool operator==(const RankedSynset&, const RankedSynset&) = default;
};

/// Per-word sum of neighbor weights (1 or 1/rank, rank from 1), normalized to
/// sum 1, ordered by descending weight then word. A word repeated within one
/// neighbor counts once.
std::vector<WeightedWord> word_frequencies(std::span<const NeighborWords> neighbors, NeighborWeighting weighting);

/// Scales weights to sum 1 and orders them by descending weight then word.
/// Zero-sum input yields an empty list.
std::vector<WeightedWord> normalize_weights(std::vector<WeightedWord> raw);

/// Harmonic-by-rank split of each word's weight over its first min(s, q)
/// senses, summed per synset and renormalized. Out-of-lexicon words are
/// dropped. Ordered by descending p0, then id.
std::vector<CandidateSynset> initial_synsets(std::span<const WeightedWord> words, const Lexicon& lexicon,
                                             std::size_t s);

/// The n highest-p0 candidates (ties by ascending id); p0 is not renormalized.
std::vector<CandidateSynset> top_n(std::vector<CandidateSynset> candidates, std::size_t n);

/// Candidates plus (expansion_depth 1) their one-hop neighbors under the
/// enabled relations with p0 = 0, and every enabled lexicon edge among them.
/// Throws std::invalid_argument if candidates is empty or has zero total p0.
SynsetGraph build_graph(std::span<const CandidateSynset> candidates, const Lexicon& lexicon,
                        const AnalysisConfig& config);

/// Restart walk: p <- alpha*restart + (1-alpha)*(T p + dangling*restart),
/// starting from restart, until the L1 change drops below tol or max_iters.
/// Nodes whose enabled out-edges have zero total lambda are dangling.
SynsetGraph propagate(SynsetGraph graph, const AnalysisConfig& config, PropagationStats* stats = nullptr);

/// Descending score, ties by ascending id.
std::vector<RankedSynset> rank_synsets(const SynsetGraph& graph);

struct AnalysisResult {
  std::vector<RankedSynset> ranked;
  std::size_t matched_synsets = 0;  // candidates before top_n; 0 means no keyword hit the lexicon
  std::size_t graph_nodes = 0;
  std::size_t graph_edges = 0;
  PropagationStats propagation;
};

/// The full chain from neighbor keywords to ranked synsets.
AnalysisResult analyze(std::span<const NeighborWords> neighbors, const Lexicon& lexicon, const AnalysisConfig& config);

}  // namespace simanno
