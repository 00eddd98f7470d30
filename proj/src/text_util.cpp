#include "simanno/text_util.hpp"

#include <cstdio>

#include "simanno/errors.hpp"

namespace simanno {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_skippable_line(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

LineReader::LineReader(const std::filesystem::path& path) : in_(path), source_(path.string()) {
  if (!in_) throw IoError("cannot open " + source_);
}

bool LineReader::next(std::string& line) {
  if (!std::getline(in_, line)) {
    if (in_.bad()) throw IoError("read error in " + source_);
    return false;
  }
  ++line_number_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<IdListLine> read_id_list_file(const std::filesystem::path& path, bool allow_empty_list) {
  LineReader reader(path);
  std::vector<IdListLine> out;
  std::string line;
  while (reader.next(line)) {
    if (is_skippable_line(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(reader.source(), reader.line_number(),
                       "expected <id><TAB><item>(,<item>)*, found " + std::to_string(fields.size()) +
                           " tab-separated fields");
    }
    IdListLine entry;
    entry.line = reader.line_number();
    entry.id = std::string(fields[0]);
    if (entry.id.empty()) throw ParseError(reader.source(), reader.line_number(), "empty id");
    if (!fields[1].empty() || !allow_empty_list) {
      for (auto item : split(fields[1], ',')) {
        if (item.empty()) throw ParseError(reader.source(), reader.line_number(), "empty list item");
        entry.items.push_back(to_lower(item));
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace simanno
