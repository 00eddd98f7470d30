#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace simanno {

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
/// ASCII lowercase; bytes >= 0x80 pass through untouched.
std::string to_lower(std::string_view text);
/// Blank (after trimming) or `#`-prefixed.
bool is_skippable_line(std::string_view line);
/// `value` printed with exactly `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// One line of a `<id>\t<item>(,<item>)*` file.
struct IdListLine {
  std::string id;
  std::vector<std::string> items;
  std::size_t line = 0;
};

/// Parses an id-list file, skipping blank and `#` lines. Items are lowercased.
/// Throws ParseError (with line number) on a missing/extra tab, an empty id,
/// or an empty item; an empty item list is accepted only if `allow_empty_list`.
std::vector<IdListLine> read_id_list_file(const std::filesystem::path& path, bool allow_empty_list);

/// Line-by-line reader with 1-based line numbers; strips a trailing '\r'.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);

  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_number_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::ifstream in_;
  std::string source_;
  std::size_t line_number_ = 0;
};

}  // namespace simanno
