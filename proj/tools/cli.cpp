#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "simanno/annotator.hpp"
#include "simanno/engine_config.hpp"
#include "simanno/errors.hpp"
#include "simanno/evaluation.hpp"
#include "simanno/feature_file.hpp"
#include "simanno/keyword_store.hpp"
#include "simanno/lexicon.hpp"
#include "simanno/synth_corpus.hpp"
#include "simanno/text_util.hpp"
#include "simanno/vector_index.hpp"

namespace simanno::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

// Flags that override config keys of the same meaning.
struct OverrideFlag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr OverrideFlag kOverrideFlags[] = {
    {"--k", "k", "similar images retrieved"},
    {"--s", "s", "senses kept per word"},
    {"--n", "n", "candidate synsets entering the graph"},
    {"--m", "m", "concepts in the output"},
    {"--relations", "relations", "enabled relations: all, none or a comma list"},
    {"--index-mode", "index_mode", "exact or perm-prefix"},
    {"--seed", "seed", "index rng seed"},
    {"--threads", "threads", "annotation workers (0 = all cores)"},
    {"--features", "features", "reference feature files, comma-separated"},
    {"--keywords", "keywords", "keyword files, one per feature file"},
    {"--index", "index", "index files, one per feature file"},
    {"--lexicon", "lexicon", "lexicon file"},
    {"--concepts", "concepts", "concepts file"},
    {"--queries", "queries", "query feature file"},
    {"--candidates", "candidates", "candidate list file"},
    {"--truth", "truth", "ground truth file"},
    {"--output", "output", "annotation output file"},
};

struct ConfigOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::vector<std::optional<std::string>> values = std::vector<std::optional<std::string>>(std::size(kOverrideFlags));

  void attach(CLI::App* app) {
    app->add_option("--config,-c", config_path, "engine config file");
    app->add_option("--preset", preset, "mpeg7-style or decaf-style");
    for (std::size_t i = 0; i < std::size(kOverrideFlags); ++i) {
      app->add_option(kOverrideFlags[i].flag, values[i], kOverrideFlags[i].help);
    }
  }

  // Defaults < config preset < config keys < --preset < other flags.
  EngineConfig resolve() const {
    EngineConfig c = config_path ? load_engine_config(*config_path) : EngineConfig{};
    if (preset) apply_preset(c, *preset);
    for (std::size_t i = 0; i < std::size(kOverrideFlags); ++i) {
      if (!values[i]) continue;
      try {
        apply_setting(c, kOverrideFlags[i].key, *values[i]);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(kOverrideFlags[i].flag) + ": " + e.what());
      }
    }
    c.validate();
    return c;
  }
};

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string("no ") + what + " file configured");
  if (!fs::exists(path)) throw IoError(std::string(what) + " file not found: " + path.string());
}

fs::path index_path(const EngineConfig& c, std::size_t i) {
  if (i < c.indexes.size()) return c.indexes[i];
  auto p = c.features.at(i);
  p.replace_extension(".idx");
  return p;
}

/// Loaded reference collections plus the vocabulary they are annotated with.
struct Engine {
  std::vector<VectorIndex> indexes;
  std::vector<KeywordStore> stores;
  Lexicon lexicon;
  ConceptSet concepts;

  std::vector<ReferenceSet> references() const {
    std::vector<ReferenceSet> out;
    for (std::size_t i = 0; i < indexes.size(); ++i) out.push_back({&indexes[i], &stores[i]});
    return out;
  }
};

Engine load_engine(EngineConfig& c) {
  if (c.features.empty() && c.indexes.empty()) throw std::invalid_argument("no reference features or indexes configured");
  const std::size_t sets = std::max(c.features.size(), c.indexes.size());
  if (c.keywords.size() != sets) throw std::invalid_argument("need one keyword file per reference set");
  Engine e;
  for (std::size_t i = 0; i < sets; ++i) {
    const auto idx = index_path(c, i);
    if (fs::exists(idx)) {
      e.indexes.push_back(load_index(idx, c.index));
    } else {
      require_file(c.features.at(i), "feature");
      auto fset = read_features(c.features[i]);
      if (c.index.dim == 0) c.index.dim = fset.dim;
      e.indexes.push_back(build_index(std::move(fset.vectors), c.index));
    }
    require_file(c.keywords[i], "keyword");
    e.stores.push_back(KeywordStore::load(c.keywords[i]));
  }
  require_file(c.lexicon, "lexicon");
  e.lexicon = Lexicon::load(c.lexicon);
  require_file(c.concepts, "concepts");
  e.concepts = ConceptSet::load(c.concepts, e.lexicon);
  return e;
}

struct LoadedQueries {
  std::vector<Query> queries;
  double load_seconds = 0.0;
};

// Sets the index dimension from the query file when unset. Queries without a
// candidate list file get every concept in `concepts`.
LoadedQueries load_queries(EngineConfig& c) {
  require_file(c.queries, "query");
  LoadedQueries out;
  const auto start = Clock::now();
  auto fset = read_features(c.queries);
  if (c.index.dim == 0) c.index.dim = fset.dim;
  if (fset.dim != c.index.dim) throw DimensionError(c.index.dim, fset.dim);
  std::optional<CandidateLists> lists;
  if (!c.candidates.empty()) {
    require_file(c.candidates, "candidate list");
    lists = read_candidate_lists(c.candidates);
  }
  for (auto& v : fset.vectors) {
    Query q{std::move(v.id), std::move(v.values), {}};
    if (lists) {
      const auto it = lists->find(q.id);
      if (it == lists->end()) throw std::invalid_argument("no candidate list for query '" + q.id + "'");
      q.candidates = it->second;
    }
    out.queries.push_back(std::move(q));
  }
  out.load_seconds = seconds_since(start);
  return out;
}

void default_candidates(LoadedQueries& loaded, const ConceptSet& concepts) {
  for (auto& q : loaded.queries) {
    if (!q.candidates.empty()) continue;
    for (const auto& d : concepts.all()) q.candidates.push_back(d.name);
  }
}

// Queries first: they fix the dimension used to load indexes.
std::pair<Engine, LoadedQueries> load_all(EngineConfig& c) {
  auto loaded = load_queries(c);
  auto engine = load_engine(c);
  default_candidates(loaded, engine.concepts);
  return {std::move(engine), std::move(loaded)};
}

// ---------------------------------------------------------------- build

int cmd_build(const ConfigOptions& opts, std::ostream& out) {
  auto c = opts.resolve();
  if (c.features.empty()) throw std::invalid_argument("no feature files configured");
  for (std::size_t i = 0; i < c.features.size(); ++i) {
    require_file(c.features[i], "feature");
    auto fset = read_features(c.features[i]);
    auto cfg = c.index;
    if (cfg.dim == 0) cfg.dim = fset.dim;
    const std::size_t count = fset.vectors.size();
    const auto start = Clock::now();
    const auto index = build_index(std::move(fset.vectors), cfg);
    const double secs = seconds_since(start);
    const auto path = index_path(c, i);
    save_index(index, path);
    out << "built " << path.string() << ": count " << count << ", dim " << cfg.dim << ", mode "
        << to_string(cfg.mode) << ", build time " << fmt("%.3f", secs) << " s\n";
  }
  return 0;
}

// ---------------------------------------------------------------- annotate

void print_phase_summary(std::ostream& out, double feature_load, const std::vector<PhaseTimes>& times) {
  PhaseTimes total;
  for (const auto& t : times) {
    total.search += t.search;
    total.keywords += t.keywords;
    total.analysis += t.analysis;
  }
  const double n = times.empty() ? 1.0 : static_cast<double>(times.size());
  const std::pair<const char*, double> rows[] = {{"feature load", feature_load},
                                                 {"search", total.search},
                                                 {"keyword fetch", total.keywords},
                                                 {"analysis", total.analysis}};
  out << "phase            total s   per query ms\n";
  for (const auto& [name, secs] : rows) {
    std::string label = name;
    label.resize(15, ' ');
    out << label << fmt("%9.4f", secs) << fmt("%15.4f", secs / n * 1000.0) << '\n';
  }
}

int cmd_annotate(const ConfigOptions& opts, std::ostream& out) {
  auto c = opts.resolve();
  auto [engine, loaded] = load_all(c);
  if (c.output.empty()) throw std::invalid_argument("no output file configured");
  const Annotator annotator(engine.references(), engine.lexicon, engine.concepts, c.annotator());
  std::vector<PhaseTimes> times;
  const auto annotations = annotator.annotate_batch(loaded.queries, c.threads, &times);
  write_annotations(c.output, annotations);
  std::size_t no_signal = 0;
  for (const auto& a : annotations) no_signal += a.no_signal ? 1 : 0;
  out << "annotated " << annotations.size() << " queries -> " << c.output.string() << '\n';
  if (no_signal) out << no_signal << " queries had no lexicon match among neighbor keywords\n";
  print_phase_summary(out, loaded.load_seconds, times);
  return 0;
}

// ---------------------------------------------------------------- evaluate

std::set<ImageId> read_subset(const fs::path& path) {
  LineReader reader(path);
  std::set<ImageId> ids;
  std::string line;
  while (reader.next(line)) {
    if (is_skippable_line(line)) continue;
    ids.insert(std::string(trim(line)));
  }
  return ids;
}

std::vector<Annotation> restrict_to(std::vector<Annotation> annotations, const std::optional<std::set<ImageId>>& subset) {
  if (!subset) return annotations;
  std::erase_if(annotations, [&](const Annotation& a) { return !subset->count(a.id); });
  return annotations;
}

struct AblationLevel {
  const char* name;
  std::size_t s;
  RelationSet relations;
};

constexpr AblationLevel kAblationLevels[] = {
    {"frequency-only", 1, RelationSet::none()},
    {"multi-sense", 7, RelationSet::none()},
    {"+hyper/hypo", 7, RelationSet{RelationType::hypernym, RelationType::hyponym}},
    {"+mero/holo", 7, RelationSet::all()},
};

std::string metrics_row(const MetricsReport& r) {
  std::string row;
  for (double v : {r.mp_c, r.mr_c, r.mf_c, r.mp_s, r.mr_s, r.mf_s, r.map_s}) {
    row += fmt("%7.1f", MetricsReport::percent(v));
  }
  return row;
}

int cmd_evaluate(const ConfigOptions& opts, const std::optional<std::string>& annotations_path,
                 const std::optional<std::string>& subset_path, bool ablation, std::ostream& out) {
  auto c = opts.resolve();
  std::optional<std::set<ImageId>> subset;
  if (subset_path) {
    require_file(*subset_path, "subset");
    subset = read_subset(*subset_path);
  }
  std::optional<CandidateLists> lists;
  if (!c.candidates.empty()) {
    require_file(c.candidates, "candidate list");
    lists = read_candidate_lists(c.candidates);
  }
  const CandidateLists* cand = lists ? &*lists : nullptr;

  if (ablation) {
    auto [engine, loaded] = load_all(c);
    require_file(c.truth, "truth");
    const auto truth = read_ground_truth(c.truth, engine.concepts);
    out << "level             MP-c   MR-c   MF-c   MP-s   MR-s   MF-s  MAP-s\n";
    for (const auto& level : kAblationLevels) {
      auto cfg = c.annotator();
      cfg.analysis.s = level.s;
      cfg.analysis.relation_set = level.relations;
      const Annotator annotator(engine.references(), engine.lexicon, engine.concepts, cfg);
      const auto annotations = restrict_to(annotator.annotate_batch(loaded.queries, c.threads), subset);
      const auto report = evaluate(annotations, truth, engine.concepts, cand);
      std::string label = level.name;
      label.resize(15, ' ');
      out << label << metrics_row(report) << '\n';
    }
    return 0;
  }

  require_file(c.lexicon, "lexicon");
  const auto lexicon = Lexicon::load(c.lexicon);
  require_file(c.concepts, "concepts");
  const auto concepts = ConceptSet::load(c.concepts, lexicon);
  const fs::path ann_path = annotations_path ? fs::path(*annotations_path) : c.output;
  require_file(ann_path, "annotation");
  const auto annotations = restrict_to(read_annotations(ann_path), subset);
  require_file(c.truth, "truth");
  const auto truth = read_ground_truth(c.truth, concepts);
  const auto report = evaluate(annotations, truth, concepts, cand);
  out << report.to_table() << '\n' << report.to_key_values();
  return 0;
}

// ---------------------------------------------------------------- bench

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

int cmd_bench(const ConfigOptions& opts, std::size_t limit, std::ostream& out) {
  auto c = opts.resolve();
  auto [engine, loaded] = load_all(c);
  if (limit && loaded.queries.size() > limit) loaded.queries.resize(limit);
  if (loaded.queries.empty()) throw std::invalid_argument("no queries to benchmark");
  const Annotator annotator(engine.references(), engine.lexicon, engine.concepts, c.annotator());
  std::vector<PhaseTimes> times;
  const auto start = Clock::now();
  annotator.annotate_batch(loaded.queries, 1, &times);
  const double wall = seconds_since(start);

  const double n = static_cast<double>(loaded.queries.size());
  std::vector<double> search, keywords, analysis;
  double search_total = 0.0;
  for (const auto& t : times) {
    search.push_back(t.search * 1000.0);
    keywords.push_back(t.keywords * 1000.0);
    analysis.push_back(t.analysis * 1000.0);
    search_total += t.search;
  }
  std::size_t refs = 0;
  for (const auto& i : engine.indexes) refs += i.size();
  out << "queries " << loaded.queries.size() << ", references " << refs << ", dim " << c.index.dim << ", mode "
      << to_string(c.index.mode) << ", k " << c.k << ", single worker\n";
  out << "pipeline throughput " << fmt("%.1f", n / wall) << " queries/s\n";
  out << "search throughput   " << fmt("%.1f", search_total > 0 ? n / search_total : 0.0) << " queries/s\n";
  out << "phase            p50 ms     p90 ms     p99 ms\n";
  const double load_ms = loaded.load_seconds / n * 1000.0;
  out << "feature load   " << fmt("%9.4f", load_ms) << fmt("%11.4f", load_ms) << fmt("%11.4f", load_ms)
      << "   (amortized)\n";
  const std::pair<const char*, const std::vector<double>*> rows[] = {
      {"search", &search}, {"keyword fetch", &keywords}, {"analysis", &analysis}};
  for (const auto& [name, values] : rows) {
    std::string label = name;
    label.resize(15, ' ');
    out << label << fmt("%9.4f", percentile(*values, 50)) << fmt("%11.4f", percentile(*values, 90))
        << fmt("%11.4f", percentile(*values, 99)) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search-based image annotation engine"};
  app.require_subcommand(1);

  ConfigOptions build_opts, annotate_opts, eval_opts, bench_opts;
  auto* build = app.add_subcommand("build", "build and save reference indexes");
  build_opts.attach(build);

  auto* annotate = app.add_subcommand("annotate", "annotate query images");
  annotate_opts.attach(annotate);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score annotations against ground truth");
  eval_opts.attach(evaluate_cmd);
  std::optional<std::string> annotations_path, subset_path;
  bool ablation = false;
  evaluate_cmd->add_option("--annotations", annotations_path, "annotation file (default: configured output)");
  evaluate_cmd->add_option("--subset", subset_path, "file of image ids to restrict scoring to");
  evaluate_cmd->add_flag("--ablation", ablation, "annotate and score the four semantic-analysis levels");

  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic corpus");
  SynthConfig synth;
  std::string out_dir;
  generate_cmd->add_option("--out", out_dir, "corpus directory")->required();
  generate_cmd->add_option("--seed", synth.rng_seed, "rng seed");
  generate_cmd->add_option("--dim", synth.dim, "feature dimension");
  generate_cmd->add_option("--concepts", synth.num_concepts, "number of concepts");
  generate_cmd->add_option("--refs-per-concept", synth.refs_per_concept, "reference images per concept");
  generate_cmd->add_option("--queries", synth.num_queries, "query images");
  generate_cmd->add_option("--sigma", synth.cluster_noise_sigma, "cluster noise sigma");
  generate_cmd->add_option("--label-noise", synth.label_noise, "chance a keyword names a wrong concept");
  generate_cmd->add_option("--lexicon-depth", synth.lexicon_depth, "hyponym chain length");
  generate_cmd->add_option("--labels-per-image", synth.labels_per_image, "concepts per image");
  generate_cmd->add_option("--groups", synth.num_groups, "hypernym groups");
  generate_cmd->add_option("--synonym-rate", synth.synonym_rate, "chance of an ambiguous synonym keyword");
  generate_cmd->add_option("--hyponym-rate", synth.hyponym_rate, "chance of a hyponym keyword");
  generate_cmd->add_option("--part-rate", synth.part_rate, "chance of a part keyword");

  auto* bench = app.add_subcommand("bench", "measure throughput and per-phase latency");
  bench_opts.attach(bench);
  std::size_t limit = 0;
  bench->add_option("--limit", limit, "benchmark at most this many queries (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*build) return cmd_build(build_opts, out);
    if (*annotate) return cmd_annotate(annotate_opts, out);
    if (*evaluate_cmd) return cmd_evaluate(eval_opts, annotations_path, subset_path, ablation, out);
    if (*bench) return cmd_bench(bench_opts, limit, out);
    if (*generate_cmd) {
      generate(synth, out_dir);
      out << "generated " << synth.num_concepts * synth.refs_per_concept << " references and " << synth.num_queries
          << " queries in " << out_dir << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace simanno::cli
