#include "simanno/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

#include "simanno/atomic_file.hpp"
#include "simanno/binary_io.hpp"
#include "simanno/errors.hpp"
#include "simanno/random.hpp"

namespace simanno {

namespace {

constexpr char kIndexMagic[8] = {'S', 'I', 'M', 'A', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::uint32_t kEndMarker = 0x21444E45;  // "END!"

// Rows per block in the batched scan; 512 x 256 floats is 512 KiB.
constexpr std::size_t kBlockRows = 512;

// Squared Euclidean distance between a float32 row and a double query, summed
// in double over eight interleaved lanes (lane j takes elements i with
// i % 8 == j, then the lanes fold pairwise). The vector and scalar paths use
// the same summation order, and the 4-query kernel repeats it per query, so
// every path yields bit-identical distances.
#if defined(__AVX2__) && defined(__FMA__)

inline __m256d accumulate4(const float* x, const double* q, __m256d acc) {
  const __m256d t = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(x)), _mm256_loadu_pd(q));
  return _mm256_fmadd_pd(t, t, acc);
}

inline double fold(__m256d lo, __m256d hi, const float* x, const double* q, std::size_t i, std::size_t d) {
  const __m256d s4 = _mm256_add_pd(lo, hi);
  const __m128d s2 = _mm_add_pd(_mm256_castpd256_pd128(s4), _mm256_extractf128_pd(s4, 1));
  double sum = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
  for (; i < d; ++i) {
    const double t = static_cast<double>(x[i]) - q[i];
    sum = std::fma(t, t, sum);
  }
  return sum;
}

inline double squared_l2(const float* x, const double* q, std::size_t d) {
  __m256d lo = _mm256_setzero_pd(), hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    lo = accumulate4(x + i, q + i, lo);
    hi = accumulate4(x + i + 4, q + i + 4, hi);
  }
  return fold(lo, hi, x, q, i, d);
}

inline void squared_l2_x4(const float* x, const double* const* q, std::size_t d, double* out) {
  __m256d lo[4], hi[4];
  for (int k = 0; k < 4; ++k) lo[k] = hi[k] = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    const __m256d x0 = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    const __m256d x1 = _mm256_cvtps_pd(_mm_loadu_ps(x + i + 4));
    for (int k = 0; k < 4; ++k) {
      const __m256d t0 = _mm256_sub_pd(x0, _mm256_loadu_pd(q[k] + i));
      const __m256d t1 = _mm256_sub_pd(x1, _mm256_loadu_pd(q[k] + i + 4));
      lo[k] = _mm256_fmadd_pd(t0, t0, lo[k]);
      hi[k] = _mm256_fmadd_pd(t1, t1, hi[k]);
    }
  }
  for (int k = 0; k < 4; ++k) out[k] = fold(lo[k], hi[k], x, q[k], i, d);
}

#else

inline double squared_l2(const float* x, const double* q, std::size_t d) {
  double acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double t = static_cast<double>(x[i + j]) - q[i + j];
      acc[j] += t * t;
    }
  }
  for (std::size_t j = 0; j < 4; ++j) acc[j] += acc[j + 4];
  acc[0] += acc[2];
  acc[1] += acc[3];
  double sum = acc[0] + acc[1];
  for (; i < d; ++i) {
    const double t = static_cast<double>(x[i]) - q[i];
    sum += t * t;
  }
  return sum;
}

inline void squared_l2_x4(const float* x, const double* const* q, std::size_t d, double* out) {
  for (int k = 0; k < 4; ++k) out[k] = squared_l2(x, q[k], d);
}

#endif

void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("query contains a non-finite value");
  }
}

// Bounded max-heap of (distance, row) keyed by (distance, id rank).
class TopK {
 public:
  using Entry = std::pair<double, std::uint32_t>;

  TopK(std::size_t k, const std::vector<std::uint32_t>& id_rank) : k_(k), less_{&id_rank} {
    heap_.reserve(k);
  }

  void offer(double dist, std::uint32_t row) {
    if (heap_.size() < k_) {
      heap_.emplace_back(dist, row);
      std::push_heap(heap_.begin(), heap_.end(), less_);
    } else if (dist <= heap_.front().first && less_(Entry{dist, row}, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), less_);
      heap_.back() = {dist, row};
      std::push_heap(heap_.begin(), heap_.end(), less_);
    }
  }

  std::vector<Entry> take() { return std::move(heap_); }

 private:
  struct Less {
    const std::vector<std::uint32_t>* id_rank;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.first != b.first) return a.first < b.first;
      return (*id_rank)[a.second] < (*id_rank)[b.second];
    }
  };

  std::size_t k_;
  Less less_;
  std::vector<Entry> heap_;
};

}  // namespace

std::string to_string(IndexMode mode) {
  return mode == IndexMode::exact ? "exact" : "perm-prefix";
}

IndexMode parse_index_mode(const std::string& text) {
  if (text == "exact") return IndexMode::exact;
  if (text == "perm-prefix") return IndexMode::perm_prefix;
  throw std::invalid_argument("unknown index mode '" + text + "' (expected exact or perm-prefix)");
}

void IndexConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("index dim must be positive");
  if (mode == IndexMode::perm_prefix) {
    if (num_pivots == 0) throw std::invalid_argument("num_pivots must be positive");
    if (num_pivots > std::numeric_limits<std::uint32_t>::max()) {
      throw std::invalid_argument("num_pivots too large");
    }
    if (prefix_len == 0 || prefix_len > num_pivots) {
      throw std::invalid_argument("prefix_len must be in [1, num_pivots]");
    }
    if (candidate_budget == 0) throw std::invalid_argument("candidate_budget must be positive");
  }
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    sum += t * t;
  }
  return std::sqrt(sum);
}

double distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += t * t;
  }
  return std::sqrt(sum);
}

VectorIndex VectorIndex::build(std::vector<FeatureVector> vectors, const IndexConfig& config) {
  config.validate();
  if (vectors.empty()) throw std::invalid_argument("cannot build an index from zero vectors");
  if (vectors.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("too many vectors for one index");
  }
  if (config.mode == IndexMode::perm_prefix && config.num_pivots > vectors.size()) {
    throw std::invalid_argument("num_pivots (" + std::to_string(config.num_pivots) +
                                ") exceeds the number of vectors (" + std::to_string(vectors.size()) + ")");
  }

  VectorIndex index;
  index.config_ = config;
  index.ids_.reserve(vectors.size());
  index.data_.reserve(vectors.size() * config.dim);
  std::unordered_set<std::string_view> seen;
  seen.reserve(vectors.size());
  for (auto& fv : vectors) {
    if (fv.id.empty()) throw std::invalid_argument("feature vector with an empty id");
    if (fv.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("feature id longer than 65535 bytes");
    }
    if (fv.values.size() != config.dim) throw DimensionError(config.dim, fv.values.size());
    for (float v : fv.values) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in vector '" + fv.id + "'");
    }
    index.data_.insert(index.data_.end(), fv.values.begin(), fv.values.end());
    index.ids_.push_back(std::move(fv.id));
  }
  for (const auto& id : index.ids_) {
    if (!seen.insert(id).second) throw std::invalid_argument("duplicate image id '" + id + "'");
  }
  index.rank_ids();

  if (config.mode == IndexMode::perm_prefix) {
    Rng rng(config.rng_seed);
    for (std::size_t row : rng.sample_without_replacement(index.size(), config.num_pivots)) {
      index.pivot_rows_.push_back(static_cast<std::uint32_t>(row));
      const auto v = index.vector(row);
      index.pivots_.insert(index.pivots_.end(), v.begin(), v.end());
    }
    index.assign_prefixes();
  }
  return index;
}

void VectorIndex::rank_ids() {
  std::vector<std::uint32_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; });
  id_rank_.assign(ids_.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) id_rank_[order[pos]] = static_cast<std::uint32_t>(pos);
}

std::span<const float> VectorIndex::vector(std::size_t row) const {
  if (row >= size()) throw std::out_of_range("row out of range");
  return {data_.data() + row * dim(), dim()};
}

std::span<const std::uint32_t> VectorIndex::permutation_prefix(std::size_t row) const {
  if (prefixes_.empty()) return {};
  if (row >= size()) throw std::out_of_range("row out of range");
  return {prefixes_.data() + row * config_.prefix_len, config_.prefix_len};
}

std::vector<std::uint32_t> VectorIndex::pivot_order(std::span<const double> query) const {
  const std::size_t p = pivot_rows_.size();
  std::vector<std::pair<double, std::uint32_t>> d(p);
  for (std::size_t i = 0; i < p; ++i) {
    d[i] = {squared_l2(pivots_.data() + i * dim(), query.data(), dim()), static_cast<std::uint32_t>(i)};
  }
  std::sort(d.begin(), d.end());
  std::vector<std::uint32_t> order(p);
  for (std::size_t i = 0; i < p; ++i) order[i] = d[i].second;
  return order;
}

void VectorIndex::assign_prefixes() {
  const std::size_t p = pivot_rows_.size();
  const std::size_t len = config_.prefix_len;
  std::vector<double> pivots(pivots_.begin(), pivots_.end());
  prefixes_.resize(size() * len);
  std::vector<std::pair<double, std::uint32_t>> d(p);
  for (std::size_t row = 0; row < size(); ++row) {
    const float* x = data_.data() + row * dim();
    for (std::size_t i = 0; i < p; ++i) {
      d[i] = {squared_l2(x, pivots.data() + i * dim(), dim()), static_cast<std::uint32_t>(i)};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(len), d.end());
    for (std::size_t j = 0; j < len; ++j) prefixes_[row * len + j] = d[j].second;
  }
}

NeighborList VectorIndex::knn(std::span<const double> query, std::size_t k) const {
  return knn(query, k, config_.candidate_budget);
}

NeighborList VectorIndex::knn(std::span<const float> query, std::size_t k) const {
  std::vector<double> q(query.begin(), query.end());
  return knn(std::span<const double>(q), k);
}

NeighborList VectorIndex::knn(std::span<const double> query, std::size_t k, std::size_t candidate_budget) const {
  if (query.size() != dim()) throw DimensionError(dim(), query.size());
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  check_finite(query);
  if (config_.mode == IndexMode::exact) return exact_scan(query, k);
  if (candidate_budget < k) {
    throw std::invalid_argument("candidate_budget (" + std::to_string(candidate_budget) +
                                ") is smaller than k (" + std::to_string(k) + ")");
  }
  return perm_prefix_scan(query, k, candidate_budget);
}

NeighborList VectorIndex::exact_scan(std::span<const double> query, std::size_t k) const {
  TopK top(std::min(k, size()), id_rank_);
  for (std::size_t row = 0; row < size(); ++row) {
    const double d2 = squared_l2(data_.data() + row * dim(), query.data(), dim());
    top.offer(std::sqrt(d2), static_cast<std::uint32_t>(row));
  }
  return finish(top.take());
}

std::vector<NeighborList> VectorIndex::knn_batch(std::span<const std::vector<double>> queries,
                                                 std::size_t k) const {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  for (const auto& q : queries) {
    if (q.size() != dim()) throw DimensionError(dim(), q.size());
    check_finite(q);
  }
  std::vector<NeighborList> out;
  out.reserve(queries.size());
  if (config_.mode != IndexMode::exact) {
    for (const auto& q : queries) out.push_back(knn(std::span<const double>(q), k));
    return out;
  }
  std::vector<TopK> tops;
  tops.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) tops.emplace_back(std::min(k, size()), id_rank_);
  for (std::size_t begin = 0; begin < size(); begin += kBlockRows) {
    const std::size_t end = std::min(size(), begin + kBlockRows);
    std::size_t qi = 0;
    for (; qi + 4 <= queries.size(); qi += 4) {
      const double* q[4] = {queries[qi].data(), queries[qi + 1].data(), queries[qi + 2].data(),
                            queries[qi + 3].data()};
      double d2[4];
      for (std::size_t row = begin; row < end; ++row) {
        squared_l2_x4(data_.data() + row * dim(), q, dim(), d2);
        for (std::size_t k4 = 0; k4 < 4; ++k4) tops[qi + k4].offer(std::sqrt(d2[k4]), static_cast<std::uint32_t>(row));
      }
    }
    for (; qi < queries.size(); ++qi) {
      const double* q = queries[qi].data();
      for (std::size_t row = begin; row < end; ++row) {
        tops[qi].offer(std::sqrt(squared_l2(data_.data() + row * dim(), q, dim())), static_cast<std::uint32_t>(row));
      }
    }
  }
  for (auto& top : tops) out.push_back(finish(top.take()));
  return out;
}

NeighborList VectorIndex::perm_prefix_scan(std::span<const double> query, std::size_t k,
                                           std::size_t budget) const {
  const std::size_t len = config_.prefix_len;
  const auto qperm = pivot_order(query);
  std::vector<std::uint32_t> position(qperm.size());
  for (std::size_t i = 0; i < qperm.size(); ++i) position[qperm[i]] = static_cast<std::uint32_t>(i);

  // Candidate order: longest common prefix first, then the smallest footrule
  // displacement over the stored prefix, then row. Being a total order, the
  // candidate set for a budget is a prefix of the set for any larger budget.
  struct Key {
    std::uint32_t gap;
    std::uint32_t footrule;
    std::uint32_t row;
    bool operator<(const Key& o) const {
      if (gap != o.gap) return gap < o.gap;
      if (footrule != o.footrule) return footrule < o.footrule;
      return row < o.row;
    }
  };
  std::vector<Key> keys(size());
  for (std::size_t row = 0; row < size(); ++row) {
    const std::uint32_t* pre = prefixes_.data() + row * len;
    std::size_t agree = 0;
    while (agree < len && pre[agree] == qperm[agree]) ++agree;
    std::uint32_t footrule = 0;
    for (std::size_t j = 0; j < len; ++j) {
      const std::uint32_t pos = position[pre[j]];
      footrule += pos > j ? pos - static_cast<std::uint32_t>(j) : static_cast<std::uint32_t>(j) - pos;
    }
    keys[row] = {static_cast<std::uint32_t>(len - agree), footrule, static_cast<std::uint32_t>(row)};
  }
  const std::size_t take = std::min(budget, size());
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take - 1), keys.end());

  TopK top(std::min(k, take), id_rank_);
  for (std::size_t i = 0; i < take; ++i) {
    const std::uint32_t row = keys[i].row;
    top.offer(std::sqrt(squared_l2(data_.data() + row * dim(), query.data(), dim())), row);
  }
  return finish(top.take());
}

NeighborList VectorIndex::finish(std::vector<std::pair<double, std::uint32_t>> best) const {
  std::sort(best.begin(), best.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return id_rank_[a.second] < id_rank_[b.second];
  });
  NeighborList out;
  out.reserve(best.size());
  for (const auto& [dist, row] : best) out.push_back({ids_[row], dist});
  return out;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  write_file_atomically(
      path,
      [&](std::ostream& out) {
        out.write(kIndexMagic, sizeof kIndexMagic);
        binary::write_le(out, kIndexVersion);
        binary::write_le(out, static_cast<std::uint32_t>(dim()));
        binary::write_le(out, static_cast<std::uint8_t>(config_.mode));
        binary::write_le(out, config_.rng_seed);
        binary::write_le(out, static_cast<std::uint32_t>(pivot_rows_.size()));
        binary::write_le(out, static_cast<std::uint32_t>(prefixes_.empty() ? 0 : config_.prefix_len));
        binary::write_le(out, static_cast<std::uint64_t>(size()));
        for (std::size_t row = 0; row < size(); ++row) {
          binary::write_le(out, static_cast<std::uint16_t>(ids_[row].size()));
          out.write(ids_[row].data(), static_cast<std::streamsize>(ids_[row].size()));
          binary::write_le_array(out, vector(row));
        }
        binary::write_le_array(out, std::span<const std::uint32_t>(pivot_rows_));
        binary::write_le_array(out, std::span<const float>(pivots_));
        binary::write_le_array(out, std::span<const std::uint32_t>(prefixes_));
        binary::write_le(out, kEndMarker);
      },
      /*binary=*/true);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path, const IndexConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index file " + path.string());
  const std::string where = "index file " + path.string() + ": ";

  char magic[sizeof kIndexMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kIndexMagic)) {
    throw IoError(where + "bad magic");
  }
  const auto version = binary::read_le<std::uint32_t>(in, "version");
  if (version != kIndexVersion) {
    throw IoError(where + "unsupported format version " + std::to_string(version) + " (expected " +
                  std::to_string(kIndexVersion) + ")");
  }
  const auto dim = binary::read_le<std::uint32_t>(in, "dim");
  if (dim != config.dim) throw DimensionError(config.dim, dim);
  const auto mode_byte = binary::read_le<std::uint8_t>(in, "mode");
  if (mode_byte > 1) throw IoError(where + "unknown index mode " + std::to_string(mode_byte));
  const auto mode = static_cast<IndexMode>(mode_byte);
  if (mode != config.mode) {
    throw IoError(where + "index mode " + to_string(mode) + " does not match configured mode " +
                  to_string(config.mode));
  }

  VectorIndex index;
  index.config_ = config;
  index.config_.rng_seed = binary::read_le<std::uint64_t>(in, "seed");
  const auto num_pivots = binary::read_le<std::uint32_t>(in, "num_pivots");
  const auto prefix_len = binary::read_le<std::uint32_t>(in, "prefix_len");
  const auto count = binary::read_le<std::uint64_t>(in, "count");
  if (mode == IndexMode::perm_prefix) {
    index.config_.num_pivots = num_pivots;
    index.config_.prefix_len = prefix_len;
    index.config_.validate();
    if (num_pivots > count) throw IoError(where + "more pivots than vectors");
  } else if (num_pivots != 0 || prefix_len != 0) {
    throw IoError(where + "exact-mode index carries pivot data");
  }
  if (count == 0) throw IoError(where + "index holds no vectors");

  index.ids_.reserve(count);
  index.data_.resize(count * dim);
  for (std::uint64_t row = 0; row < count; ++row) {
    const auto len = binary::read_le<std::uint16_t>(in, "id length");
    if (len == 0) throw IoError(where + "empty id");
    index.ids_.push_back(binary::read_bytes(in, len, "id"));
    binary::read_le_array(in, std::span<float>(index.data_.data() + row * dim, dim), "vector");
  }
  index.pivot_rows_.resize(num_pivots);
  binary::read_le_array(in, std::span<std::uint32_t>(index.pivot_rows_), "pivot rows");
  index.pivots_.resize(static_cast<std::size_t>(num_pivots) * dim);
  binary::read_le_array(in, std::span<float>(index.pivots_), "pivot vectors");
  index.prefixes_.resize(static_cast<std::size_t>(count) * prefix_len);
  binary::read_le_array(in, std::span<std::uint32_t>(index.prefixes_), "permutation prefixes");
  if (binary::read_le<std::uint32_t>(in, "end marker") != kEndMarker) throw IoError(where + "bad end marker");
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(where + "trailing bytes");

  for (auto row : index.pivot_rows_) {
    if (row >= count) throw IoError(where + "pivot row out of range");
  }
  for (auto p : index.prefixes_) {
    if (p >= num_pivots) throw IoError(where + "permutation entry out of range");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : index.ids_) {
    if (!seen.insert(id).second) throw IoError(where + "duplicate id '" + id + "'");
  }
  index.rank_ids();
  return index;
}

}  // namespace simanno
