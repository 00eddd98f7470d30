#include "simanno/keyword_store.hpp"

#include <algorithm>
#include <stdexcept>

#include "simanno/atomic_file.hpp"
#include "simanno/errors.hpp"
#include "simanno/text_util.hpp"

namespace simanno {

namespace {

std::vector<std::string> dedup_lowercase(std::vector<std::string> words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (auto& w : words) {
    auto lw = to_lower(w);
    if (std::find(out.begin(), out.end(), lw) == out.end()) out.push_back(std::move(lw));
  }
  return out;
}

}  // namespace

KeywordStore KeywordStore::load(const std::filesystem::path& path) {
  KeywordStore store;
  for (auto& entry : read_id_list_file(path, /*allow_empty_list=*/false)) {
    auto words = dedup_lowercase(std::move(entry.items));
    if (!store.records_.emplace(entry.id, std::move(words)).second) {
      throw ParseError(path.string(), entry.line, "duplicate image id '" + entry.id + "'");
    }
  }
  return store;
}

KeywordStore KeywordStore::from_records(std::vector<KeywordRecord> records) {
  KeywordStore store;
  for (auto& r : records) {
    if (r.id.empty()) throw std::invalid_argument("keyword record with an empty id");
    for (const auto& w : r.words) {
      if (w.empty() || w.find_first_of(",\t\n") != std::string::npos) {
        throw std::invalid_argument("invalid keyword '" + w + "' for image '" + r.id + "'");
      }
    }
    auto words = dedup_lowercase(std::move(r.words));
    if (!store.records_.emplace(r.id, std::move(words)).second) {
      throw std::invalid_argument("duplicate image id '" + r.id + "'");
    }
  }
  return store;
}

std::span<const std::string> KeywordStore::words(const ImageId& id) const {
  const auto it = records_.find(id);
  if (it == records_.end()) return {};
  return it->second;
}

WordsLookup KeywordStore::words_for(std::span<const ImageId> ids) const {
  WordsLookup out;
  out.entries.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = records_.find(id);
    if (it == records_.end()) {
      ++out.missing;
      out.entries.push_back({id, {}});
    } else {
      out.entries.push_back({id, it->second});
    }
  }
  return out;
}

WordsLookup KeywordStore::words_for(const NeighborList& neighbors) const {
  std::vector<ImageId> ids;
  ids.reserve(neighbors.size());
  for (const auto& n : neighbors) ids.push_back(n.id);
  return words_for(ids);
}

void write_keyword_records(const std::filesystem::path& path, std::span<const KeywordRecord> records) {
  write_file_atomically(path, [&](std::ostream& out) {
    for (const auto& r : records) {
      if (r.words.empty()) throw std::invalid_argument("keyword record '" + r.id + "' has no words");
      out << r.id << '\t';
      for (std::size_t i = 0; i < r.words.size(); ++i) out << (i ? "," : "") << r.words[i];
      out << '\n';
    }
  });
}

}  // namespace simanno
