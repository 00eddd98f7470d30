#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simanno/vector_index.hpp"

namespace simanno {

struct KeywordRecord {
  ImageId id;
  std::vector<std::string> words;
};

struct NeighborWords {
  ImageId id;
  std::span<const std::string> words;  // views into the store; empty for unknown ids
};

struct WordsLookup {
  std::vector<NeighborWords> entries;  // one per requested id, request order
  std::size_t missing = 0;
};

/// Image id -> deduplicated lowercase keywords. Read-only after construction.
class KeywordStore {
 public:
  KeywordStore() = default;

  /// Keyword TSV: `<image_id>\t<word>(,<word>)*`. Throws ParseError with the
  /// line number on malformed lines or a duplicate id.
  static KeywordStore load(const std::filesystem::path& path);

  /// Lowercases and deduplicates each record (first occurrence wins).
  static KeywordStore from_records(std::vector<KeywordRecord> records);

  std::span<const std::string> words(const ImageId& id) const;
  bool contains(const ImageId& id) const { return records_.count(id) != 0; }
  std::size_t size() const noexcept { return records_.size(); }

  WordsLookup words_for(std::span<const ImageId> ids) const;
  WordsLookup words_for(const NeighborList& neighbors) const;

 private:
  std::unordered_map<ImageId, std::vector<std::string>> records_;
};

/// Writes records in the keyword TSV format, in the given order.
void write_keyword_records(const std::filesystem::path& path, std::span<const KeywordRecord> records);

}  // namespace simanno
