#include "simanno/synth_corpus.hpp"

#include <algorithm>
#include <stdexcept>

#include "simanno/atomic_file.hpp"
#include "simanno/feature_file.hpp"
#include "simanno/random.hpp"

namespace simanno {

namespace {

// Stream separation constants for the per-part generators.
constexpr std::uint64_t kPrototypeStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kReferenceStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kQueryStream = 0x94d049bb133111ebULL;

std::string numbered(const char* prefix, std::size_t i, std::size_t count) {
  std::size_t width = 2;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 100; c /= 10) ++width;
  auto digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::string synset_of(const std::string& lemma) { return lemma + ".n.01"; }

struct Vocabulary {
  std::vector<std::string> concept_lemma;
  std::vector<std::string> alias;                     // rank 1 decoy, rank 2 concept
  std::vector<std::vector<std::string>> hyponyms;     // chain, nearest first
  std::vector<std::string> part;
};

Vocabulary make_vocabulary(const SynthConfig& c) {
  Vocabulary v;
  for (std::size_t i = 0; i < c.num_concepts; ++i) {
    const auto name = synth_concept_name(i, c.num_concepts);
    v.concept_lemma.push_back(name);
    v.alias.push_back(numbered("alias", i, c.num_concepts));
    std::vector<std::string> chain;
    for (std::size_t d = 1; d <= c.lexicon_depth; ++d) chain.push_back(name + "kind" + std::to_string(d));
    v.hyponyms.push_back(std::move(chain));
    v.part.push_back(name + "part");
  }
  return v;
}

std::string lexicon_text(const SynthConfig& c, const Vocabulary& v) {
  LexiconBuilder b("<synth>");
  b.add_synset(synset_of("entity"), {"entity"});
  b.add_sense("entity", synset_of("entity"), 1);
  for (std::size_t g = 0; g < c.num_groups; ++g) {
    const auto lemma = numbered("group", g, c.num_groups);
    b.add_synset(synset_of(lemma), {lemma});
    b.add_sense(lemma, synset_of(lemma), 1);
    b.add_relation(RelationType::hypernym, synset_of(lemma), synset_of("entity"));
  }
  for (std::size_t i = 0; i < c.num_concepts; ++i) {
    const auto& lemma = v.concept_lemma[i];
    const auto syn = synset_of(lemma);
    b.add_synset(syn, {lemma, v.alias[i]});
    b.add_sense(lemma, syn, 1);
    b.add_relation(RelationType::hypernym, syn, synset_of(numbered("group", i % c.num_groups, c.num_groups)));

    const auto decoy = synset_of(numbered("decoy", i, c.num_concepts));
    b.add_synset(decoy, {v.alias[i]});
    b.add_sense(v.alias[i], decoy, 1);
    b.add_sense(v.alias[i], syn, 2);

    std::string parent = syn;
    for (const auto& h : v.hyponyms[i]) {
      b.add_synset(synset_of(h), {h});
      b.add_sense(h, synset_of(h), 1);
      b.add_relation(RelationType::hypernym, synset_of(h), parent);
      parent = synset_of(h);
    }
    b.add_synset(synset_of(v.part[i]), {v.part[i]});
    b.add_sense(v.part[i], synset_of(v.part[i]), 1);
    b.add_relation(RelationType::meronym, syn, synset_of(v.part[i]));
  }
  return b.build().to_text();
}

std::vector<std::size_t> label_set(const SynthConfig& c, std::size_t cluster) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < c.labels_per_image; ++j) out.push_back((cluster + j) % c.num_concepts);
  return out;
}

std::vector<float> sample_point(Rng& rng, const std::vector<double>& prototype, double sigma) {
  std::vector<float> out(prototype.size());
  for (std::size_t d = 0; d < prototype.size(); ++d) out[d] = static_cast<float>(prototype[d] + sigma * rng.normal());
  return out;
}

std::string keyword_for(Rng& rng, const SynthConfig& c, const Vocabulary& v, std::size_t concept_index,
                        const std::vector<std::size_t>& labels) {
  if (rng.bernoulli(c.label_noise)) {
    std::vector<std::size_t> wrong;
    for (std::size_t i = 0; i < c.num_concepts; ++i) {
      if (std::find(labels.begin(), labels.end(), i) == labels.end()) wrong.push_back(i);
    }
    return v.concept_lemma[wrong[rng.below(wrong.size())]];
  }
  double u = rng.uniform();
  if (u < c.synonym_rate) return v.alias[concept_index];
  u -= c.synonym_rate;
  if (u < c.hyponym_rate && !v.hyponyms[concept_index].empty()) {
    const auto& chain = v.hyponyms[concept_index];
    return chain[rng.below(chain.size())];
  }
  u -= c.hyponym_rate;
  if (u < c.part_rate) return v.part[concept_index];
  return v.concept_lemma[concept_index];
}

}  // namespace

void SynthConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("synth dim must be at least 1");
  if (num_concepts < 2) throw std::invalid_argument("synth num_concepts must be at least 2");
  if (refs_per_concept < 1) throw std::invalid_argument("synth refs_per_concept must be at least 1");
  if (num_queries < 1) throw std::invalid_argument("synth num_queries must be at least 1");
  if (!(cluster_noise_sigma >= 0.0)) throw std::invalid_argument("synth cluster_noise_sigma must be >= 0");
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw std::invalid_argument("synth label_noise must be in [0, 1)");
  if (labels_per_image < 1 || labels_per_image >= num_concepts) {
    throw std::invalid_argument("synth labels_per_image must be in [1, num_concepts)");
  }
  if (num_groups < 1) throw std::invalid_argument("synth num_groups must be at least 1");
  for (double r : {synonym_rate, hyponym_rate, part_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("synth word-form rates must be in [0, 1]");
  }
  if (synonym_rate + hyponym_rate + part_rate > 1.0) {
    throw std::invalid_argument("synth word-form rates must sum to at most 1");
  }
}

std::string synth_concept_name(std::size_t i, std::size_t num_concepts) { return numbered("concept", i, num_concepts); }

SynthWorld build_world(const SynthConfig& config) {
  config.validate();
  const auto vocab = make_vocabulary(config);
  SynthWorld world;
  world.dim = config.dim;
  world.lexicon_text = lexicon_text(config, vocab);
  for (std::size_t i = 0; i < config.num_concepts; ++i) {
    world.concepts.push_back({vocab.concept_lemma[i], {synset_of(vocab.concept_lemma[i])}});
  }

  Rng proto_rng(config.rng_seed ^ kPrototypeStream);
  std::vector<std::vector<double>> prototypes(config.num_concepts, std::vector<double>(config.dim));
  for (auto& p : prototypes) {
    for (auto& x : p) x = proto_rng.normal();
  }

  Rng ref_rng(config.rng_seed ^ kReferenceStream);
  const std::size_t total_refs = config.num_concepts * config.refs_per_concept;
  world.references.reserve(total_refs);
  world.keywords.reserve(total_refs);
  for (std::size_t r = 0; r < total_refs; ++r) {
    const std::size_t cluster = r % config.num_concepts;
    const auto labels = label_set(config, cluster);
    const auto id = numbered("r", r, total_refs);
    world.references.push_back({id, sample_point(ref_rng, prototypes[cluster], config.cluster_noise_sigma)});
    KeywordRecord record{id, {}};
    for (std::size_t c : labels) {
      auto word = keyword_for(ref_rng, config, vocab, c, labels);
      if (std::find(record.words.begin(), record.words.end(), word) == record.words.end()) {
        record.words.push_back(std::move(word));
      }
    }
    world.keywords.push_back(std::move(record));
  }

  Rng query_rng(config.rng_seed ^ kQueryStream);
  std::vector<std::string> all_names(vocab.concept_lemma);
  for (std::size_t q = 0; q < config.num_queries; ++q) {
    const std::size_t cluster = q % config.num_concepts;
    const auto id = numbered("q", q, config.num_queries);
    world.queries.push_back({id, sample_point(query_rng, prototypes[cluster], config.cluster_noise_sigma)});
    world.candidates[id] = all_names;
    ConceptNameSet truth;
    for (std::size_t c : label_set(config, cluster)) truth.insert(vocab.concept_lemma[c]);
    world.truth[id] = std::move(truth);
  }
  return world;
}

void write_world(const SynthWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_features(dir / SynthFiles::features, world.dim, world.references);
  write_keyword_records(dir / SynthFiles::keywords, world.keywords);
  write_file_atomically(dir / SynthFiles::lexicon, [&](std::ostream& out) { out << world.lexicon_text; });
  write_file_atomically(dir / SynthFiles::concepts, [&](std::ostream& out) {
    for (const auto& c : world.concepts) {
      out << "C\t" << c.name << '\t';
      for (std::size_t i = 0; i < c.synsets.size(); ++i) out << (i ? "," : "") << c.synsets[i];
      out << '\n';
    }
  });
  write_features(dir / SynthFiles::queries, world.dim, world.queries);
  write_candidate_lists(dir / SynthFiles::candidates, world.candidates);
  write_ground_truth(dir / SynthFiles::truth, world.truth);
  write_file_atomically(dir / SynthFiles::config, [&](std::ostream& out) {
    out << "# generated corpus; paths are relative to this file\n"
        << "preset = decaf-style\n"
        << "dim = " << world.dim << '\n'
        << "features = " << SynthFiles::features << '\n'
        << "keywords = " << SynthFiles::keywords << '\n'
        << "index = features.idx\n"
        << "lexicon = " << SynthFiles::lexicon << '\n'
        << "concepts = " << SynthFiles::concepts << '\n'
        << "queries = " << SynthFiles::queries << '\n'
        << "candidates = " << SynthFiles::candidates << '\n'
        << "truth = " << SynthFiles::truth << '\n'
        << "output = annotations.tsv\n";
  });
}

}  // namespace simanno
