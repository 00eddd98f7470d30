#include "simanno/semantic_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace simanno {

namespace {

bool by_weight_then_word(const WeightedWord& a, const WeightedWord& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.word < b.word;
}

bool by_p0_then_id(const CandidateSynset& a, const CandidateSynset& b) {
  if (a.p0 != b.p0) return a.p0 > b.p0;
  return a.id < b.id;
}

}  // namespace

std::string to_string(NeighborWeighting weighting) {
  return weighting == NeighborWeighting::uniform ? "uniform" : "reciprocal-rank";
}

NeighborWeighting parse_neighbor_weighting(const std::string& text) {
  if (text == "uniform") return NeighborWeighting::uniform;
  if (text == "reciprocal-rank") return NeighborWeighting::reciprocal_rank;
  throw std::invalid_argument("unknown neighbor weighting '" + text + "' (expected uniform or reciprocal-rank)");
}

void AnalysisConfig::validate() const {
  if (s < 1) throw std::invalid_argument("s must be at least 1");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("relation lambdas must be finite and >= 0");
  }
  if (expansion_depth > 1) throw std::invalid_argument("expansion_depth must be 0 or 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

std::vector<WeightedWord> normalize_weights(std::vector<WeightedWord> raw) {
  double total = 0.0;
  for (const auto& w : raw) total += w.weight;
  if (!(total > 0.0)) return {};
  for (auto& w : raw) w.weight /= total;
  std::sort(raw.begin(), raw.end(), by_weight_then_word);
  return raw;
}

std::vector<WeightedWord> word_frequencies(std::span<const NeighborWords> neighbors, NeighborWeighting weighting) {
  std::map<std::string, double> raw;
  std::vector<std::string_view> seen;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double w = weighting == NeighborWeighting::uniform ? 1.0 : 1.0 / static_cast<double>(i + 1);
    seen.clear();
    for (const auto& word : neighbors[i].words) {
      if (std::find(seen.begin(), seen.end(), word) != seen.end()) continue;
      seen.push_back(word);
      raw[word] += w;
    }
  }
  std::vector<WeightedWord> out;
  out.reserve(raw.size());
  for (auto& [word, weight] : raw) out.push_back({word, weight});
  return normalize_weights(std::move(out));
}

std::vector<CandidateSynset> initial_synsets(std::span<const WeightedWord> words, const Lexicon& lexicon,
                                             std::size_t s) {
  if (s < 1) throw std::invalid_argument("s must be at least 1");
  std::unordered_map<SynsetIndex, double> mass;
  std::vector<SynsetIndex> order;  // first-touch order keeps accumulation deterministic
  for (const auto& w : words) {
    const auto senses = lexicon.sense_indices(w.word);
    const std::size_t q = std::min(s, senses.size());
    if (q == 0) continue;
    double harmonic = 0.0;
    for (std::size_t j = 1; j <= q; ++j) harmonic += 1.0 / static_cast<double>(j);
    for (std::size_t r = 1; r <= q; ++r) {
      const SynsetIndex syn = senses[r - 1];
      auto [it, inserted] = mass.try_emplace(syn, 0.0);
      if (inserted) order.push_back(syn);
      it->second += w.weight * (1.0 / static_cast<double>(r)) / harmonic;
    }
  }
  double total = 0.0;
  for (SynsetIndex syn : order) total += mass[syn];
  std::vector<CandidateSynset> out;
  if (!(total > 0.0)) return out;
  out.reserve(order.size());
  for (SynsetIndex syn : order) out.push_back({lexicon.name(syn), syn, mass[syn] / total, 0.0});
  std::sort(out.begin(), out.end(), by_p0_then_id);
  return out;
}

std::vector<CandidateSynset> top_n(std::vector<CandidateSynset> candidates, std::size_t n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (candidates.size() > n) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                      by_p0_then_id);
    candidates.resize(n);
  } else {
    std::sort(candidates.begin(), candidates.end(), by_p0_then_id);
  }
  return candidates;
}

SynsetGraph build_graph(std::span<const CandidateSynset> candidates, const Lexicon& lexicon,
                        const AnalysisConfig& config) {
  if (candidates.empty()) throw std::invalid_argument("build_graph needs at least one candidate");
  SynsetGraph graph;
  std::unordered_map<SynsetIndex, std::size_t> position;
  for (const auto& c : candidates) {
    if (!position.emplace(c.index, graph.nodes.size()).second) {
      throw std::invalid_argument("duplicate candidate synset '" + c.id + "'");
    }
    graph.nodes.push_back({c.id, c.index, c.p0, 0.0});
  }
  if (config.expansion_depth >= 1) {
    const std::size_t seeds = graph.nodes.size();
    for (std::size_t i = 0; i < seeds; ++i) {
      for (const auto& e : lexicon.edges(graph.nodes[i].index)) {
        if (!config.relation_set.contains(e.type)) continue;
        if (position.emplace(e.target, graph.nodes.size()).second) {
          graph.nodes.push_back({lexicon.name(e.target), e.target, 0.0, 0.0});
        }
      }
    }
  }
  for (std::size_t u = 0; u < graph.nodes.size(); ++u) {
    for (const auto& e : lexicon.edges(graph.nodes[u].index)) {
      if (!config.relation_set.contains(e.type)) continue;
      const auto it = position.find(e.target);
      if (it != position.end()) graph.edges.push_back({u, e.type, it->second});
    }
  }
  double total = 0.0;
  for (const auto& node : graph.nodes) total += node.p0;
  if (!(total > 0.0)) throw std::invalid_argument("candidate probabilities sum to zero");
  graph.restart.reserve(graph.nodes.size());
  for (const auto& node : graph.nodes) graph.restart.push_back(node.p0 / total);
  return graph;
}

SynsetGraph propagate(SynsetGraph graph, const AnalysisConfig& config, PropagationStats* stats) {
  config.validate();
  const std::size_t count = graph.nodes.size();
  if (graph.restart.size() != count) throw std::invalid_argument("restart vector size does not match node count");
  double restart_sum = 0.0;
  for (double r : graph.restart) {
    if (!(r >= 0.0)) throw std::invalid_argument("restart entries must be nonnegative");
    restart_sum += r;
  }
  if (std::abs(restart_sum - 1.0) > 1e-9) throw std::invalid_argument("restart vector must sum to 1");

  std::vector<double> out_weight(count, 0.0);
  for (const auto& e : graph.edges) out_weight[e.from] += config.lambda_for(e.type);
  struct Flow {
    std::size_t from;
    std::size_t to;
    double weight;
  };
  std::vector<Flow> flows;
  flows.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    if (out_weight[e.from] > 0.0) flows.push_back({e.from, e.to, config.lambda_for(e.type) / out_weight[e.from]});
  }

  PropagationStats local;
  const double alpha = config.alpha;
  std::vector<double> p = graph.restart;
  std::vector<double> next(count);
  auto mass_deviation = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return std::abs(sum - 1.0);
  };
  local.max_mass_deviation = mass_deviation(p);
  while (local.iterations < config.max_iters) {
    std::fill(next.begin(), next.end(), 0.0);
    double dangling = 0.0;
    for (std::size_t u = 0; u < count; ++u) {
      if (!(out_weight[u] > 0.0)) dangling += p[u];
    }
    for (const auto& f : flows) next[f.to] += f.weight * p[f.from];
    double change = 0.0;
    for (std::size_t v = 0; v < count; ++v) {
      next[v] = alpha * graph.restart[v] + (1.0 - alpha) * (next[v] + dangling * graph.restart[v]);
      change += std::abs(next[v] - p[v]);
    }
    p.swap(next);
    ++local.iterations;
    local.final_change = change;
    local.max_mass_deviation = std::max(local.max_mass_deviation, mass_deviation(p));
    if (change < config.tol) {
      local.converged = true;
      break;
    }
  }
  for (std::size_t v = 0; v < count; ++v) graph.nodes[v].score = p[v];
  if (stats) *stats = local;
  return graph;
}

std::vector<RankedSynset> rank_synsets(const SynsetGraph& graph) {
  std::vector<RankedSynset> out;
  out.reserve(graph.nodes.size());
  for (const auto& node : graph.nodes) out.push_back({node.id, node.score});
  std::sort(out.begin(), out.end(), [](const RankedSynset& a, const RankedSynset& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

AnalysisResult analyze(std::span<const NeighborWords> neighbors, const Lexicon& lexicon, const AnalysisConfig& config) {
  config.validate();
  AnalysisResult result;
  const auto words = word_frequencies(neighbors, config.neighbor_weighting);
  auto candidates = initial_synsets(words, lexicon, config.s);
  result.matched_synsets = candidates.size();
  if (candidates.empty()) return result;
  candidates = top_n(std::move(candidates), config.n);
  const auto graph = propagate(build_graph(candidates, lexicon, config), config, &result.propagation);
  result.graph_nodes = graph.nodes.size();
  result.graph_edges = graph.edges.size();
  result.ranked = rank_synsets(graph);
  return result;
}

}  // namespace simanno
