#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simanno/annotator.hpp"
#include "simanno/semantic_analysis.hpp"
#include "simanno/vector_index.hpp"

namespace simanno {

struct EngineConfig {
  IndexConfig index;
  AnalysisConfig analysis;
  std::size_t k = 70;
  std::size_t m = 5;
  std::string preset;  // empty when none was applied

  // One index per feature file; keywords[i] belongs to features[i].
  std::vector<std::filesystem::path> features;
  std::vector<std::filesystem::path> keywords;
  std::vector<std::filesystem::path> indexes;
  std::filesystem::path lexicon;
  std::filesystem::path concepts;
  std::filesystem::path queries;
  std::filesystem::path candidates;
  std::filesystem::path truth;
  std::filesystem::path output;
  std::size_t threads = 1;

  AnnotatorConfig annotator() const { return {k, m, analysis}; }

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// "mpeg7-style" (k=25, n=200, m=7) or "decaf-style" (k=70, n=100, m=5); both
/// set s=7 and enable every relation type.
void apply_preset(EngineConfig& config, std::string_view name);

/// Sets one key. Relative paths resolve against `base_dir`. Throws
/// std::invalid_argument for unknown keys and malformed values.
void apply_setting(EngineConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// `key = value` lines; `#` starts a comment line. Throws ParseError.
std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& source);

/// Defaults, then the preset (`preset_override` if given, else the `preset`
/// key), then the remaining keys in file order. Errors carry the line.
EngineConfig resolve_config(const std::vector<ConfigEntry>& entries, const std::string& source,
                            const std::filesystem::path& base_dir,
                            const std::optional<std::string>& preset_override = std::nullopt);

/// Reads a config file; paths in it are relative to its directory.
EngineConfig load_engine_config(const std::filesystem::path& path,
                                const std::optional<std::string>& preset_override = std::nullopt);

/// Canonical text of every key.
std::string to_config_text(const EngineConfig& config);

}  // namespace simanno
