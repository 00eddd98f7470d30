#include "simanno/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "simanno/atomic_file.hpp"
#include "simanno/errors.hpp"
#include "simanno/text_util.hpp"

namespace simanno {

namespace {

std::string_view file_tag(RelationType type) {
  switch (type) {
    case RelationType::hypernym: return "hyper";
    case RelationType::hyponym: return "hypo";
    case RelationType::meronym: return "mero";
    case RelationType::holonym: return "holo";
  }
  return "?";
}

bool valid_token(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n,") == std::string_view::npos;
}

}  // namespace

std::string_view to_string(RelationType type) {
  switch (type) {
    case RelationType::hypernym: return "hypernym";
    case RelationType::hyponym: return "hyponym";
    case RelationType::meronym: return "meronym";
    case RelationType::holonym: return "holonym";
  }
  return "?";
}

RelationType parse_relation_type(std::string_view text) {
  for (auto t : kAllRelationTypes) {
    if (text == to_string(t) || text == file_tag(t)) return t;
  }
  throw std::invalid_argument("unknown relation type '" + std::string(text) + "'");
}

RelationType inverse(RelationType type) {
  switch (type) {
    case RelationType::hypernym: return RelationType::hyponym;
    case RelationType::hyponym: return RelationType::hypernym;
    case RelationType::meronym: return RelationType::holonym;
    case RelationType::holonym: return RelationType::meronym;
  }
  return type;
}

RelationSet RelationSet::parse(std::string_view text) {
  const auto t = trim(text);
  if (t.empty() || t == "none") return none();
  if (t == "all") return all();
  RelationSet set;
  for (auto part : split(t, ',')) set.insert(parse_relation_type(trim(part)));
  return set;
}

std::string RelationSet::to_string() const {
  std::string out;
  for (auto t : kAllRelationTypes) {
    if (!contains(t)) continue;
    if (!out.empty()) out += ',';
    out += simanno::to_string(t);
  }
  return out.empty() ? "none" : out;
}

// ---------------------------------------------------------------------------

void LexiconBuilder::add_synset(std::string_view id, std::vector<std::string> lemmas, std::size_t line) {
  if (!valid_token(id)) throw ParseError(source_, line, "invalid synset id '" + std::string(id) + "'");
  if (lemmas.empty()) throw ParseError(source_, line, "synset '" + std::string(id) + "' has no lemmas");
  for (auto& l : lemmas) {
    if (l.empty()) throw ParseError(source_, line, "empty lemma for synset '" + std::string(id) + "'");
    l = to_lower(l);
  }
  synsets_.push_back({std::string(id), std::move(lemmas), line});
}

void LexiconBuilder::add_sense(std::string_view word, std::string_view synset, std::size_t rank, std::size_t line) {
  if (word.empty() || word.find_first_of("\t\r\n,") != std::string_view::npos) {
    throw ParseError(source_, line, "invalid word '" + std::string(word) + "'");
  }
  if (rank == 0) throw ParseError(source_, line, "sense rank must be a positive integer");
  senses_.push_back({to_lower(word), std::string(synset), rank, line});
}

void LexiconBuilder::add_relation(RelationType type, std::string_view from, std::string_view to, std::size_t line) {
  relations_.push_back({type, std::string(from), std::string(to), line});
}

Lexicon LexiconBuilder::build() const {
  Lexicon lex;
  for (const auto& s : synsets_) {
    const auto index = static_cast<SynsetIndex>(lex.names_.size());
    if (!lex.by_name_.emplace(s.id, index).second) {
      throw ParseError(source_, s.line, "synset '" + s.id + "' declared twice");
    }
    lex.names_.push_back(s.id);
    lex.lemmas_.push_back(s.lemmas);
  }
  auto resolve = [&](const std::string& id, std::size_t line) {
    const auto it = lex.by_name_.find(id);
    if (it == lex.by_name_.end()) throw ParseError(source_, line, "undeclared synset '" + id + "'");
    return it->second;
  };

  // word -> rank -> (synset, line)
  std::map<std::string, std::map<std::size_t, std::pair<SynsetIndex, std::size_t>>> ranked;
  for (const auto& s : senses_) {
    const SynsetIndex idx = resolve(s.synset, s.line);
    auto& by_rank = ranked[s.word];
    if (!by_rank.emplace(s.rank, std::pair{idx, s.line}).second) {
      throw ParseError(source_, s.line,
                       "duplicate rank " + std::to_string(s.rank) + " for word '" + s.word + "'");
    }
  }
  for (const auto& [word, by_rank] : ranked) {
    std::vector<SynsetIndex> list;
    std::size_t expected = 1;
    for (const auto& [rank, entry] : by_rank) {
      if (rank != expected) {
        throw ParseError(source_, entry.second,
                         "sense ranks of word '" + word + "' skip rank " + std::to_string(expected));
      }
      if (std::find(list.begin(), list.end(), entry.first) != list.end()) {
        throw ParseError(source_, entry.second,
                         "word '" + word + "' lists synset '" + lex.names_[entry.first] + "' twice");
      }
      list.push_back(entry.first);
      ++expected;
    }
    lex.senses_.emplace(word, std::move(list));
  }

  std::set<std::tuple<SynsetIndex, RelationType, SynsetIndex>> edges;
  for (const auto& r : relations_) {
    const SynsetIndex from = resolve(r.from, r.line);
    const SynsetIndex to = resolve(r.to, r.line);
    edges.emplace(from, r.type, to);
    edges.emplace(to, inverse(r.type), from);
  }
  lex.edges_.assign(lex.names_.size(), {});
  for (const auto& [from, type, to] : edges) lex.edges_[from].push_back({type, to});
  for (auto& list : lex.edges_) {
    std::sort(list.begin(), list.end(), [&](const LexiconEdge& a, const LexiconEdge& b) {
      if (a.type != b.type) return a.type < b.type;
      return lex.names_[a.target] < lex.names_[b.target];
    });
  }
  return lex;
}

// ---------------------------------------------------------------------------

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

Lexicon Lexicon::parse(std::string_view text, const std::string& source) {
  LexiconBuilder builder(source);
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_skippable_line(line)) continue;
    const auto f = split(line, '\t');
    auto expect_fields = [&](std::size_t n) {
      if (f.size() != n) {
        throw ParseError(source, line_no,
                         "'" + std::string(f[0]) + "' record needs " + std::to_string(n) + " tab-separated fields");
      }
    };
    if (f[0] == "S") {
      expect_fields(3);
      std::vector<std::string> lemmas;
      for (auto l : split(f[2], ',')) lemmas.emplace_back(l);
      builder.add_synset(f[1], std::move(lemmas), line_no);
    } else if (f[0] == "W") {
      expect_fields(4);
      std::size_t rank = 0;
      const auto* end = f[3].data() + f[3].size();
      const auto [ptr, ec] = std::from_chars(f[3].data(), end, rank);
      if (ec != std::errc() || ptr != end || rank == 0) {
        throw ParseError(source, line_no, "invalid sense rank '" + std::string(f[3]) + "'");
      }
      builder.add_sense(f[1], f[2], rank, line_no);
    } else if (f[0] == "R") {
      expect_fields(4);
      RelationType type;
      if (f[1] == "hyper") {
        type = RelationType::hypernym;
      } else if (f[1] == "hypo") {
        type = RelationType::hyponym;
      } else if (f[1] == "mero") {
        type = RelationType::meronym;
      } else if (f[1] == "holo") {
        type = RelationType::holonym;
      } else {
        throw ParseError(source, line_no, "unknown relation tag '" + std::string(f[1]) + "'");
      }
      builder.add_relation(type, f[2], f[3], line_no);
    } else {
      throw ParseError(source, line_no, "unknown record type '" + std::string(f[0]) + "'");
    }
  }
  return builder.build();
}

std::string Lexicon::to_text() const {
  std::ostringstream out;
  for (SynsetIndex i = 0; i < names_.size(); ++i) {
    out << "S\t" << names_[i] << '\t';
    for (std::size_t j = 0; j < lemmas_[i].size(); ++j) out << (j ? "," : "") << lemmas_[i][j];
    out << '\n';
  }
  std::vector<const std::string*> words;
  for (const auto& [w, _] : senses_) words.push_back(&w);
  std::sort(words.begin(), words.end(), [](auto* a, auto* b) { return *a < *b; });
  for (const auto* w : words) {
    const auto& list = senses_.at(*w);
    for (std::size_t r = 0; r < list.size(); ++r) out << "W\t" << *w << '\t' << names_[list[r]] << '\t' << r + 1 << '\n';
  }
  for (SynsetIndex i = 0; i < names_.size(); ++i) {
    for (const auto& e : edges_[i]) out << "R\t" << file_tag(e.type) << '\t' << names_[i] << '\t' << names_[e.target] << '\n';
  }
  return out.str();
}

void Lexicon::save(const std::filesystem::path& path) const {
  const auto text = to_text();
  write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

std::vector<SynsetId> Lexicon::senses(std::string_view word, std::size_t s) const {
  if (s == 0) throw std::invalid_argument("s must be at least 1");
  const auto list = sense_indices(word);
  std::vector<SynsetId> out;
  for (std::size_t i = 0; i < list.size() && i < s; ++i) out.push_back(names_[list[i]]);
  return out;
}

std::span<const SynsetIndex> Lexicon::sense_indices(std::string_view word) const {
  const auto it = senses_.find(to_lower(word));
  if (it == senses_.end()) return {};
  return it->second;
}

std::vector<std::pair<SynsetId, RelationType>> Lexicon::related(const SynsetId& synset, RelationSet types) const {
  const auto idx = find(synset);
  if (!idx) throw std::invalid_argument("undeclared synset '" + synset + "'");
  std::vector<std::pair<SynsetId, RelationType>> out;
  for (const auto& e : edges_[*idx]) {
    if (types.contains(e.type)) out.emplace_back(names_[e.target], e.type);
  }
  return out;
}

std::optional<SynsetIndex> Lexicon::find(std::string_view synset) const {
  const auto it = by_name_.find(std::string(synset));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t Lexicon::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& list : edges_) n += list.size();
  return n;
}

}  // namespace simanno
