#include "simanno/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "simanno/atomic_file.hpp"
#include "simanno/errors.hpp"
#include "simanno/text_util.hpp"

namespace simanno {

namespace {

double f_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

ConceptNameSet predicted_set(const Annotation& a) {
  ConceptNameSet s;
  for (const auto& c : a.ranked) s.insert(c.name);
  return s;
}

bool candidate_of(const CandidateLists* candidates, const ImageId& id, const std::string& name) {
  if (!candidates) return true;
  const auto it = candidates->find(id);
  if (it == candidates->end()) return false;
  return std::find(it->second.begin(), it->second.end(), name) != it->second.end();
}

}  // namespace

PRF sample_prf(const ConceptNameSet& predicted, const ConceptNameSet& truth) {
  std::size_t hits = 0;
  for (const auto& p : predicted) hits += truth.count(p);
  PRF out;
  out.precision = predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
  out.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  out.f = f_score(out.precision, out.recall);
  return out;
}

double average_precision(std::span<const std::string> ranked, const ConceptNameSet& truth) {
  if (truth.empty()) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  ConceptNameSet counted;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (!truth.count(ranked[i]) || !counted.insert(ranked[i]).second) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(truth.size());
}

ConceptCounts count_concept(std::span<const Annotation> annotations, const GroundTruth& truth,
                            const std::string& concept_name, const CandidateLists* candidates) {
  ConceptCounts counts;
  for (const auto& a : annotations) {
    const auto t = truth.find(a.id);
    if (t == truth.end() || !candidate_of(candidates, a.id, concept_name)) continue;
    const bool predicted = std::any_of(a.ranked.begin(), a.ranked.end(),
                                       [&](const ScoredConcept& c) { return c.name == concept_name; });
    const bool relevant = t->second.count(concept_name) != 0;
    if (predicted && relevant) ++counts.tp;
    if (predicted && !relevant) ++counts.fp;
    if (!predicted && relevant) ++counts.fn;
  }
  return counts;
}

std::optional<PRF> concept_prf(const ConceptCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  PRF out;
  out.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  out.f = f_score(out.precision, out.recall);
  return out;
}

MetricsReport evaluate(std::span<const Annotation> annotations, const GroundTruth& truth, const ConceptSet& concepts,
                       const CandidateLists* candidates) {
  MetricsReport report;
  for (const auto& a : annotations) {
    for (const auto& c : a.ranked) {
      if (!concepts.contains(c.name)) {
        throw std::invalid_argument("annotation for '" + a.id + "' references unknown concept '" + c.name + "'");
      }
    }
  }

  // Sums run in id order so the means do not depend on input order.
  std::vector<const Annotation*> ordered;
  for (const auto& a : annotations) ordered.push_back(&a);
  std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->id < y->id; });

  double sp = 0, sr = 0, sf = 0, sap = 0;
  for (const auto* a : ordered) {
    const auto t = truth.find(a->id);
    if (t == truth.end()) {
      ++report.samples_without_truth;
      continue;
    }
    if (t->second.empty()) {
      ++report.samples_empty_truth;
      continue;
    }
    const auto prf = sample_prf(predicted_set(*a), t->second);
    std::vector<std::string> names;
    for (const auto& c : a->ranked) names.push_back(c.name);
    sp += prf.precision;
    sr += prf.recall;
    sf += prf.f;
    sap += average_precision(names, t->second);
    ++report.samples_scored;
  }
  if (report.samples_scored) {
    const double n = static_cast<double>(report.samples_scored);
    report.mp_s = sp / n;
    report.mr_s = sr / n;
    report.mf_s = sf / n;
    report.map_s = sap / n;
  }

  double cp = 0, cr = 0, cf = 0;
  for (const auto& def : concepts.all()) {
    ConceptRow row{def.name, count_concept(annotations, truth, def.name, candidates), std::nullopt};
    row.prf = concept_prf(row.counts);
    if (row.prf) {
      cp += row.prf->precision;
      cr += row.prf->recall;
      cf += row.prf->f;
      ++report.concepts_scored;
    } else {
      ++report.concepts_skipped;
    }
    report.per_concept.push_back(std::move(row));
  }
  if (report.concepts_scored) {
    const double n = static_cast<double>(report.concepts_scored);
    report.mp_c = cp / n;
    report.mr_c = cr / n;
    report.mf_c = cf / n;
  }
  return report;
}

double MetricsReport::percent(double value) { return std::round(value * 1000.0) / 10.0; }

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  out << "  MP-c   MR-c   MF-c   MP-s   MR-s   MF-s  MAP-s\n";
  for (double v : {mp_c, mr_c, mf_c, mp_s, mr_s, mf_s, map_s}) {
    auto s = format_fixed(percent(v), 1);
    out << std::string(s.size() < 6 ? 6 - s.size() : 0, ' ') << s << ' ';
  }
  out << "\n\nsamples scored " << samples_scored << ", skipped (empty truth) " << samples_empty_truth
      << ", skipped (no truth entry) " << samples_without_truth << "\n";
  out << "concepts scored " << concepts_scored << ", skipped (no relevant sample) " << concepts_skipped << "\n\n";
  out << "concept              TP     FP     FN      P      R      F\n";
  for (const auto& row : per_concept) {
    std::string name = row.name;
    if (name.size() < 18) name.resize(18, ' ');
    out << name;
    for (auto n : {row.counts.tp, row.counts.fp, row.counts.fn}) {
      const auto s = std::to_string(n);
      out << std::string(s.size() < 7 ? 7 - s.size() : 1, ' ') << s;
    }
    if (row.prf) {
      for (double v : {row.prf->precision, row.prf->recall, row.prf->f}) {
        const auto s = format_fixed(percent(v), 1);
        out << std::string(s.size() < 7 ? 7 - s.size() : 1, ' ') << s;
      }
    } else {
      out << "  skipped";
    }
    out << '\n';
  }
  return out.str();
}

std::string MetricsReport::to_key_values() const {
  std::ostringstream out;
  const std::pair<const char*, double> values[] = {{"MP_c", mp_c}, {"MR_c", mr_c}, {"MF_c", mf_c}, {"MP_s", mp_s},
                                                   {"MR_s", mr_s}, {"MF_s", mf_s}, {"MAP_s", map_s}};
  for (const auto& [key, v] : values) out << key << '=' << format_fixed(percent(v), 1) << '\n';
  out << "samples_scored=" << samples_scored << '\n'
      << "samples_skipped_empty_truth=" << samples_empty_truth << '\n'
      << "samples_skipped_no_truth=" << samples_without_truth << '\n'
      << "concepts_scored=" << concepts_scored << '\n'
      << "concepts_skipped=" << concepts_skipped << '\n';
  return out.str();
}

GroundTruth read_ground_truth(const std::filesystem::path& path, const ConceptSet& concepts) {
  GroundTruth truth;
  for (auto& entry : read_id_list_file(path, /*allow_empty_list=*/true)) {
    ConceptNameSet names;
    for (auto& n : entry.items) {
      if (!concepts.contains(n)) throw ParseError(path.string(), entry.line, "unknown concept '" + n + "'");
      names.insert(std::move(n));
    }
    if (!truth.emplace(entry.id, std::move(names)).second) {
      throw ParseError(path.string(), entry.line, "duplicate image id '" + entry.id + "'");
    }
  }
  return truth;
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  write_file_atomically(path, [&](std::ostream& out) {
    for (const auto& [id, names] : truth) {
      out << id << '\t';
      bool first = true;
      for (const auto& n : names) {
        out << (first ? "" : ",") << n;
        first = false;
      }
      out << '\n';
    }
  });
}

}  // namespace simanno
