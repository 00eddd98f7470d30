#include "simanno/engine_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "simanno/errors.hpp"
#include "simanno/text_util.hpp"

namespace simanno {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::filesystem::path resolve(std::string_view text, const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(text)};
  if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

std::vector<std::filesystem::path> resolve_list(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<std::filesystem::path> out;
  if (text.empty()) return out;
  for (auto item : split(text, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty entry in path list '" + std::string(text) + "'");
    out.push_back(resolve(item, base_dir));
  }
  return out;
}

std::string join_paths(const std::vector<std::filesystem::path>& paths) {
  std::string out;
  for (std::size_t i = 0; i < paths.size(); ++i) out += (i ? "," : "") + paths[i].string();
  return out;
}

}  // namespace

void EngineConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  analysis.validate();
  if (!keywords.empty() && keywords.size() != features.size()) {
    throw std::invalid_argument("need one keyword file per feature file");
  }
  if (!indexes.empty() && indexes.size() != features.size() && !features.empty()) {
    throw std::invalid_argument("need one index path per feature file");
  }
}

void apply_preset(EngineConfig& config, std::string_view name) {
  if (name == "mpeg7-style") {
    config.k = 25;
    config.analysis.n = 200;
    config.m = 7;
  } else if (name == "decaf-style") {
    config.k = 70;
    config.analysis.n = 100;
    config.m = 5;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected mpeg7-style or decaf-style)");
  }
  config.analysis.s = 7;
  config.analysis.relation_set = RelationSet::all();
  config.preset = std::string(name);
}

void apply_setting(EngineConfig& c, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir) {
  auto& a = c.analysis;
  if (key == "preset") {
    apply_preset(c, value);
  } else if (key == "dim") {
    c.index.dim = parse_number<std::size_t>(key, value);
  } else if (key == "index_mode") {
    c.index.mode = parse_index_mode(std::string(value));
  } else if (key == "num_pivots") {
    c.index.num_pivots = parse_number<std::size_t>(key, value);
  } else if (key == "prefix_len") {
    c.index.prefix_len = parse_number<std::size_t>(key, value);
  } else if (key == "candidate_budget") {
    c.index.candidate_budget = parse_number<std::size_t>(key, value);
  } else if (key == "seed" || key == "rng_seed") {
    c.index.rng_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "k") {
    c.k = parse_number<std::size_t>(key, value);
  } else if (key == "m") {
    c.m = parse_number<std::size_t>(key, value);
  } else if (key == "s") {
    a.s = parse_number<std::size_t>(key, value);
  } else if (key == "n") {
    a.n = parse_number<std::size_t>(key, value);
  } else if (key == "neighbor_weighting") {
    a.neighbor_weighting = parse_neighbor_weighting(std::string(value));
  } else if (key == "relations") {
    a.relation_set = RelationSet::parse(value);
  } else if (key.starts_with("lambda.")) {
    a.set_lambda(parse_relation_type(key.substr(7)), parse_number<double>(key, value));
  } else if (key == "alpha") {
    a.alpha = parse_number<double>(key, value);
  } else if (key == "expansion_depth") {
    a.expansion_depth = parse_number<unsigned>(key, value);
  } else if (key == "max_iters") {
    a.max_iters = parse_number<std::size_t>(key, value);
  } else if (key == "tol") {
    a.tol = parse_number<double>(key, value);
  } else if (key == "features") {
    c.features = resolve_list(value, base_dir);
  } else if (key == "keywords") {
    c.keywords = resolve_list(value, base_dir);
  } else if (key == "index") {
    c.indexes = resolve_list(value, base_dir);
  } else if (key == "lexicon") {
    c.lexicon = resolve(value, base_dir);
  } else if (key == "concepts") {
    c.concepts = resolve(value, base_dir);
  } else if (key == "queries") {
    c.queries = resolve(value, base_dir);
  } else if (key == "candidates") {
    c.candidates = resolve(value, base_dir);
  } else if (key == "truth") {
    c.truth = resolve(value, base_dir);
  } else if (key == "output") {
    c.output = resolve(value, base_dir);
  } else if (key == "threads") {
    c.threads = parse_number<std::size_t>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& source) {
  std::vector<ConfigEntry> out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_skippable_line(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    out.push_back({std::string(key), std::string(value), line_no});
  }
  return out;
}

EngineConfig resolve_config(const std::vector<ConfigEntry>& entries, const std::string& source,
                            const std::filesystem::path& base_dir, const std::optional<std::string>& preset_override) {
  EngineConfig config;
  try {
    if (preset_override) apply_preset(config, *preset_override);
  } catch (const std::invalid_argument& e) {
    throw ParseError("--preset", 0, e.what());
  }
  for (const auto& e : entries) {
    if (e.key != "preset" || preset_override) continue;
    try {
      apply_preset(config, e.value);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(source, e.line, ex.what());
    }
  }
  for (const auto& e : entries) {
    if (e.key == "preset") continue;
    try {
      apply_setting(config, e.key, e.value, base_dir);
    } catch (const std::invalid_argument& ex) {
      throw ParseError(source, e.line, ex.what());
    }
  }
  return config;
}

EngineConfig load_engine_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return resolve_config(parse_config_entries(text.str(), path.string()), path.string(), path.parent_path(),
                        preset_override);
}

std::string to_config_text(const EngineConfig& c) {
  std::ostringstream out;
  const auto& a = c.analysis;
  if (!c.preset.empty()) out << "# preset " << c.preset << " applied\n";
  out << "dim = " << c.index.dim << '\n'
      << "index_mode = " << to_string(c.index.mode) << '\n'
      << "num_pivots = " << c.index.num_pivots << '\n'
      << "prefix_len = " << c.index.prefix_len << '\n'
      << "candidate_budget = " << c.index.candidate_budget << '\n'
      << "seed = " << c.index.rng_seed << '\n'
      << "k = " << c.k << '\n'
      << "m = " << c.m << '\n'
      << "s = " << a.s << '\n'
      << "n = " << a.n << '\n'
      << "neighbor_weighting = " << to_string(a.neighbor_weighting) << '\n'
      << "relations = " << a.relation_set.to_string() << '\n';
  for (auto t : kAllRelationTypes) out << "lambda." << to_string(t) << " = " << a.lambda_for(t) << '\n';
  out << "alpha = " << a.alpha << '\n'
      << "expansion_depth = " << a.expansion_depth << '\n'
      << "max_iters = " << a.max_iters << '\n'
      << "tol = " << a.tol << '\n'
      << "features = " << join_paths(c.features) << '\n'
      << "keywords = " << join_paths(c.keywords) << '\n'
      << "index = " << join_paths(c.indexes) << '\n'
      << "lexicon = " << c.lexicon.string() << '\n'
      << "concepts = " << c.concepts.string() << '\n'
      << "queries = " << c.queries.string() << '\n'
      << "candidates = " << c.candidates.string() << '\n'
      << "truth = " << c.truth.string() << '\n'
      << "output = " << c.output.string() << '\n'
      << "threads = " << c.threads << '\n';
  return out.str();
}

}  // namespace simanno
