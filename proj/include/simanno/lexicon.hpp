#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace simanno {

using SynsetId = std::string;
/// Dense handle of a synset inside one Lexicon.
using SynsetIndex = std::uint32_t;

enum class RelationType : std::uint8_t { hypernym = 0, hyponym = 1, meronym = 2, holonym = 3 };

inline constexpr std::array<RelationType, 4> kAllRelationTypes = {
    RelationType::hypernym, RelationType::hyponym, RelationType::meronym, RelationType::holonym};

std::string_view to_string(RelationType type);
/// Accepts the full names and the lexicon-file tags (hyper, hypo, mero, holo).
RelationType parse_relation_type(std::string_view text);
RelationType inverse(RelationType type);

class RelationSet {
 public:
  constexpr RelationSet() = default;
  constexpr RelationSet(std::initializer_list<RelationType> types) {
    for (auto t : types) insert(t);
  }

  static constexpr RelationSet all() {
    return {RelationType::hypernym, RelationType::hyponym, RelationType::meronym, RelationType::holonym};
  }
  static constexpr RelationSet none() { return {}; }

  /// Comma-separated relation names; "none" and "" give the empty set, "all" every type.
  static RelationSet parse(std::string_view text);

  constexpr void insert(RelationType t) { bits_ |= bit(t); }
  constexpr bool contains(RelationType t) const { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }

  std::string to_string() const;

  friend constexpr bool operator==(RelationSet, RelationSet) = default;

 private:
  static constexpr std::uint8_t bit(RelationType t) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t)); }
  std::uint8_t bits_ = 0;
};

struct LexiconEdge {
  RelationType type;
  SynsetIndex target;
};

class LexiconBuilder;

/// WordNet-style sense inventory with typed relations. Every hypernym edge has
/// its hyponym mirror and every meronym edge its holonym mirror. Read-only
/// after construction.
class Lexicon {
 public:
  /// Lexicon file, tab-separated lines:
  ///   S <synset> <lemma>(,<lemma>)*
  ///   W <word> <synset> <rank>
  ///   R <hyper|hypo|mero|holo> <from> <to>
  /// Throws ParseError with the offending line number.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::string_view text, const std::string& source = "<lexicon>");

  /// Writes the canonical form (synsets, senses, then every stored edge).
  void save(const std::filesystem::path& path) const;
  std::string to_text() const;

  /// First min(s, q) senses of `word` in rank order; empty for unknown words.
  std::vector<SynsetId> senses(std::string_view word, std::size_t s) const;
  /// All senses of `word` in rank order.
  std::span<const SynsetIndex> sense_indices(std::string_view word) const;

  /// Outgoing edges with type in `types`, ordered by type then target id.
  /// Throws std::invalid_argument for an undeclared synset.
  std::vector<std::pair<SynsetId, RelationType>> related(const SynsetId& synset, RelationSet types) const;
  /// Every outgoing edge of `synset`, ordered by type then target id.
  std::span<const LexiconEdge> edges(SynsetIndex synset) const { return edges_.at(synset); }

  std::optional<SynsetIndex> find(std::string_view synset) const;
  const SynsetId& name(SynsetIndex synset) const { return names_.at(synset); }
  std::span<const std::string> lemmas(SynsetIndex synset) const { return lemmas_.at(synset); }

  std::size_t synset_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept;
  std::size_t word_count() const noexcept { return senses_.size(); }

 private:
  friend class LexiconBuilder;

  std::vector<SynsetId> names_;
  std::vector<std::vector<std::string>> lemmas_;
  std::unordered_map<std::string, SynsetIndex> by_name_;
  std::unordered_map<std::string, std::vector<SynsetIndex>> senses_;  // rank order
  std::vector<std::vector<LexiconEdge>> edges_;
};

/// Accumulates declarations in any order and validates them in build().
/// `line` arguments are reported in errors (0 when there is no source line).
class LexiconBuilder {
 public:
  explicit LexiconBuilder(std::string source = "<lexicon>") : source_(std::move(source)) {}

  void add_synset(std::string_view id, std::vector<std::string> lemmas, std::size_t line = 0);
  void add_sense(std::string_view word, std::string_view synset, std::size_t rank, std::size_t line = 0);
  void add_relation(RelationType type, std::string_view from, std::string_view to, std::size_t line = 0);

  /// Throws ParseError on undeclared synsets, duplicate (word, rank) pairs,
  /// or sense ranks that are not exactly 1..q.
  Lexicon build() const;

 private:
  struct SynsetDecl {
    std::string id;
    std::vector<std::string> lemmas;
    std::size_t line;
  };
  struct SenseDecl {
    std::string word;
    std::string synset;
    std::size_t rank;
    std::size_t line;
  };
  struct RelationDecl {
    RelationType type;
    std::string from;
    std::string to;
    std::size_t line;
  };

  std::string source_;
  std::vector<SynsetDecl> synsets_;
  std::vector<SenseDecl> senses_;
  std::vector<RelationDecl> relations_;
};

}  // namespace simanno
