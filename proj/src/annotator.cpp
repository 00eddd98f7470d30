#include "simanno/annotator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "simanno/atomic_file.hpp"
#include "simanno/errors.hpp"
#include "simanno/text_util.hpp"

namespace simanno {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Queries sharing one blocked pass over each index.
constexpr std::size_t kSearchBatch = 16;

}  // namespace

// --- concepts ---------------------------------------------------------------

ConceptSet ConceptSet::from_defs(std::vector<ConceptDef> defs, const Lexicon& lexicon) {
  ConceptSet set;
  for (auto& d : defs) {
    d.name = to_lower(d.name);
    if (d.name.empty() || d.name.find_first_of(",\t:\n") != std::string::npos) {
      throw std::invalid_argument("invalid concept name '" + d.name + "'");
    }
    if (d.synsets.empty()) throw std::invalid_argument("concept '" + d.name + "' links no synsets");
    for (const auto& s : d.synsets) {
      if (!lexicon.find(s)) {
        throw std::invalid_argument("concept '" + d.name + "' links undeclared synset '" + s + "'");
      }
    }
  }
  std::sort(defs.begin(), defs.end(), [](const ConceptDef& a, const ConceptDef& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!set.by_name_.emplace(defs[i].name, i).second) {
      throw std::invalid_argument("duplicate concept '" + defs[i].name + "'");
    }
  }
  set.defs_ = std::move(defs);
  return set;
}

ConceptSet ConceptSet::load(const std::filesystem::path& path, const Lexicon& lexicon) {
  LineReader reader(path);
  std::vector<ConceptDef> defs;
  std::set<std::string> names;
  std::string line;
  while (reader.next(line)) {
    if (is_skippable_line(line)) continue;
    const auto f = split(line, '\t');
    if (f.size() != 3 || f[0] != "C") {
      throw ParseError(reader.source(), reader.line_number(), "expected C<TAB><name><TAB><synset>(,<synset>)*");
    }
    ConceptDef def{to_lower(f[1]), {}};
    if (def.name.empty()) throw ParseError(reader.source(), reader.line_number(), "empty concept name");
    for (auto s : split(f[2], ',')) {
      if (s.empty()) throw ParseError(reader.source(), reader.line_number(), "empty synset id");
      if (!lexicon.find(s)) {
        throw ParseError(reader.source(), reader.line_number(),
                         "concept '" + def.name + "' links undeclared synset '" + std::string(s) + "'");
      }
      def.synsets.emplace_back(s);
    }
    if (!names.insert(def.name).second) {
      throw ParseError(reader.source(), reader.line_number(), "duplicate concept '" + def.name + "'");
    }
    defs.push_back(std::move(def));
  }
  return from_defs(std::move(defs), lexicon);
}

void ConceptSet::save(const std::filesystem::path& path) const {
  write_file_atomically(path, [&](std::ostream& out) {
    for (const auto& d : defs_) {
      out << "C\t" << d.name << '\t';
      for (std::size_t i = 0; i < d.synsets.size(); ++i) out << (i ? "," : "") << d.synsets[i];
      out << '\n';
    }
  });
}

const ConceptDef* ConceptSet::find(const std::string& name) const {
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &defs_[it->second];
}

const ConceptDef& ConceptSet::at(const std::string& name) const {
  const auto* def = find(name);
  if (!def) throw std::invalid_argument("unknown concept '" + name + "'");
  return *def;
}

// --- scoring ----------------------------------------------------------------

std::vector<ScoredConcept> score_concepts(std::span<const RankedSynset> ranked_synsets, const ConceptSet& concepts,
                                          std::span<const std::string> candidates) {
  if (candidates.empty()) throw std::invalid_argument("candidate concept list is empty");
  std::unordered_map<std::string_view, double> score_of;
  score_of.reserve(ranked_synsets.size());
  for (const auto& r : ranked_synsets) score_of.emplace(r.id, r.score);

  std::vector<ScoredConcept> out;
  std::set<std::string_view> seen;
  for (const auto& name : candidates) {
    const auto& def = concepts.at(name);
    if (!seen.insert(def.name).second) continue;
    double best = 0.0;
    for (const auto& syn : def.synsets) {
      const auto it = score_of.find(syn);
      if (it != score_of.end()) best = std::max(best, it->second);
    }
    out.push_back({def.name, best});
  }
  std::sort(out.begin(), out.end(), [](const ScoredConcept& a, const ScoredConcept& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.name < b.name;
  });
  return out;
}

std::vector<ScoredConcept> select_top(std::vector<ScoredConcept> scored, std::size_t m) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (scored.size() > m) scored.resize(m);
  return scored;
}

// --- pipeline ---------------------------------------------------------------

void AnnotatorConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  analysis.validate();
}

Annotator::Annotator(std::vector<ReferenceSet> references, const Lexicon& lexicon, const ConceptSet& concepts,
                     AnnotatorConfig config)
    : references_(std::move(references)), lexicon_(lexicon), concepts_(concepts), config_(std::move(config)) {
  config_.validate();
  if (references_.empty()) throw std::invalid_argument("annotator needs at least one reference set");
  const std::size_t dim = references_.front().index ? references_.front().index->dim() : 0;
  for (const auto& r : references_) {
    if (!r.index || !r.keywords) throw std::invalid_argument("reference set without index or keywords");
    if (r.index->dim() != dim) throw DimensionError(dim, r.index->dim());
  }
}

void Annotator::check_query(const Query& query) const {
  if (query.candidates.empty()) throw std::invalid_argument("query '" + query.id + "' has no candidate concepts");
  for (const auto& c : query.candidates) concepts_.at(c);
  const std::size_t dim = references_.front().index->dim();
  if (query.feature.size() != dim) throw DimensionError(dim, query.feature.size());
}

std::vector<Annotator::MergedNeighbor> Annotator::merge_neighbors(const std::vector<NeighborList>& per_set) const {
  std::vector<MergedNeighbor> merged;
  for (std::size_t s = 0; s < per_set.size(); ++s) {
    for (const auto& n : per_set[s]) merged.push_back({n, s});
  }
  std::stable_sort(merged.begin(), merged.end(), [](const MergedNeighbor& a, const MergedNeighbor& b) {
    if (a.neighbor.distance != b.neighbor.distance) return a.neighbor.distance < b.neighbor.distance;
    if (a.neighbor.id != b.neighbor.id) return a.neighbor.id < b.neighbor.id;
    return a.set < b.set;
  });
  if (merged.size() > config_.k) merged.resize(config_.k);
  return merged;
}

Annotation Annotator::finish(const Query& query, const std::vector<NeighborList>& per_set, PhaseTimes* times) const {
  auto start = Clock::now();
  const auto merged = merge_neighbors(per_set);
  Annotation ann{query.id, {}, false, 0};
  std::vector<NeighborWords> words;
  words.reserve(merged.size());
  for (const auto& mn : merged) {
    const auto w = references_[mn.set].keywords->words(mn.neighbor.id);
    if (w.empty() && !references_[mn.set].keywords->contains(mn.neighbor.id)) ++ann.missing_keywords;
    words.push_back({mn.neighbor.id, w});
  }
  if (times) times->keywords = seconds_since(start);

  start = Clock::now();
  const auto analysis = analyze(words, lexicon_, config_.analysis);
  ann.no_signal = analysis.matched_synsets == 0;
  ann.ranked = select_top(score_concepts(analysis.ranked, concepts_, query.candidates), config_.m);
  if (times) times->analysis = seconds_since(start);
  return ann;
}

Annotation Annotator::annotate(const Query& query, PhaseTimes* times) const {
  check_query(query);
  const auto start = Clock::now();
  std::vector<NeighborList> per_set;
  per_set.reserve(references_.size());
  for (const auto& r : references_) per_set.push_back(r.index->knn(std::span<const float>(query.feature), config_.k));
  if (times) times->search = seconds_since(start);
  return finish(query, per_set, times);
}

std::vector<Annotation> Annotator::annotate_batch(std::span<const Query> queries, std::size_t threads,
                                                  std::vector<PhaseTimes>* times) const {
  for (const auto& q : queries) check_query(q);
  {
    std::set<std::string_view> ids;
    for (const auto& q : queries) {
      if (!ids.insert(q.id).second) throw std::invalid_argument("duplicate query id '" + q.id + "'");
    }
  }
  std::vector<Annotation> out(queries.size());
  std::vector<PhaseTimes> phase(queries.size());

  const std::size_t blocks = (queries.size() + kSearchBatch - 1) / kSearchBatch;
  std::atomic<std::size_t> next_block{0};
  auto worker = [&] {
    for (std::size_t b = next_block++; b < blocks; b = next_block++) {
      const std::size_t begin = b * kSearchBatch;
      const std::size_t end = std::min(queries.size(), begin + kSearchBatch);
      std::vector<std::vector<double>> feats;
      feats.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) feats.emplace_back(queries[i].feature.begin(), queries[i].feature.end());

      const auto start = Clock::now();
      std::vector<std::vector<NeighborList>> per_query(end - begin);
      for (const auto& r : references_) {
        auto lists = r.index->knn_batch(feats, config_.k);
        for (std::size_t i = 0; i < lists.size(); ++i) per_query[i].push_back(std::move(lists[i]));
      }
      const double search_each = seconds_since(start) / static_cast<double>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        phase[i].search = search_each;
        out[i] = finish(queries[i], per_query[i - begin], &phase[i]);
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out[a].id < out[b].id; });
  std::vector<Annotation> sorted;
  sorted.reserve(out.size());
  if (times) times->clear();
  for (std::size_t i : order) {
    sorted.push_back(std::move(out[i]));
    if (times) times->push_back(phase[i]);
  }
  return sorted;
}

Annotation annotate(const Query& query, std::span<const ReferenceSet> references, const Lexicon& lexicon,
                    const ConceptSet& concepts, const AnnotatorConfig& config) {
  return Annotator({references.begin(), references.end()}, lexicon, concepts, config).annotate(query);
}

// --- files ------------------------------------------------------------------

std::map<ImageId, std::vector<std::string>> read_candidate_lists(const std::filesystem::path& path) {
  std::map<ImageId, std::vector<std::string>> lists;
  for (auto& entry : read_id_list_file(path, /*allow_empty_list=*/false)) {
    if (!lists.emplace(entry.id, std::move(entry.items)).second) {
      throw ParseError(path.string(), entry.line, "duplicate image id '" + entry.id + "'");
    }
  }
  return lists;
}

void write_candidate_lists(const std::filesystem::path& path,
                           const std::map<ImageId, std::vector<std::string>>& lists) {
  write_file_atomically(path, [&](std::ostream& out) {
    for (const auto& [id, names] : lists) {
      out << id << '\t';
      for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
      out << '\n';
    }
  });
}

std::string format_annotation(const Annotation& annotation) {
  std::string line = annotation.id;
  line += '\t';
  for (std::size_t i = 0; i < annotation.ranked.size(); ++i) {
    if (i) line += ',';
    line += annotation.ranked[i].name;
    line += ':';
    line += format_fixed(annotation.ranked[i].score, 6);
  }
  return line;
}

void write_annotations(const std::filesystem::path& path, std::span<const Annotation> annotations) {
  write_file_atomically(path, [&](std::ostream& out) {
    for (const auto& a : annotations) out << format_annotation(a) << '\n';
  });
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<Annotation> out;
  std::set<std::string> ids;
  std::string line;
  while (reader.next(line)) {
    if (is_skippable_line(line)) continue;
    auto fail = [&](const std::string& what) { throw ParseError(reader.source(), reader.line_number(), what); };
    const auto f = split(line, '\t');
    if (f.size() != 2) fail("expected <id><TAB><name>:<score>(,<name>:<score>)*");
    Annotation a;
    a.id = std::string(f[0]);
    if (a.id.empty()) fail("empty image id");
    if (!ids.insert(a.id).second) fail("duplicate image id '" + a.id + "'");
    if (!f[1].empty()) {
      for (auto item : split(f[1], ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos || colon == 0) fail("malformed entry '" + std::string(item) + "'");
        const auto num = item.substr(colon + 1);
        double score = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), score);
        if (ec != std::errc() || ptr != num.data() + num.size() || !std::isfinite(score) || score < 0.0) {
          fail("bad score '" + std::string(num) + "'");
        }
        a.ranked.push_back({to_lower(item.substr(0, colon)), score});
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace simanno
