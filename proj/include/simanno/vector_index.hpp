#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace simanno {

using ImageId = std::string;

struct FeatureVector {
  ImageId id;
  std::vector<float> values;
};

enum class IndexMode : std::uint8_t { exact = 0, perm_prefix = 1 };

std::string to_string(IndexMode mode);
IndexMode parse_index_mode(const std::string& text);

struct IndexConfig {
  std::size_t dim = 0;
  IndexMode mode = IndexMode::exact;
  std::size_t num_pivots = 128;
  std::size_t prefix_len = 8;
  /// Upper bound on vectors refined by true distance per perm-prefix query.
  std::size_t candidate_budget = 5000;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

struct Neighbor {
  ImageId id;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending by distance, ties by ascending id.
using NeighborList = std::vector<Neighbor>;

/// Euclidean distance accumulated in double precision.
double distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const float> a, std::span<const float> b);

/// Immutable kNN index over float32 vectors. Safe for concurrent queries.
class VectorIndex {
 public:
  /// Throws on empty input, duplicate ids, non-finite values, bad dimensions,
  /// or (perm-prefix) fewer vectors than pivots.
  static VectorIndex build(std::vector<FeatureVector> vectors, const IndexConfig& config);

  NeighborList knn(std::span<const double> query, std::size_t k) const;
  NeighborList knn(std::span<const float> query, std::size_t k) const;

  /// Perm-prefix search with an explicit candidate budget; equals knn() in exact mode.
  NeighborList knn(std::span<const double> query, std::size_t k, std::size_t candidate_budget) const;

  /// Answers many exact-mode queries with one blocked pass over the data.
  /// Results are identical to calling knn() per query.
  std::vector<NeighborList> knn_batch(std::span<const std::vector<double>> queries, std::size_t k) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return config_.dim; }
  const IndexConfig& config() const noexcept { return config_; }

  const ImageId& id(std::size_t row) const { return ids_.at(row); }
  std::span<const float> vector(std::size_t row) const;

  /// Rows of the vectors chosen as pivots, in pivot order. Empty in exact mode.
  std::span<const std::uint32_t> pivot_rows() const noexcept { return pivot_rows_; }
  /// The prefix_len nearest pivot indices of a row, nearest first.
  std::span<const std::uint32_t> permutation_prefix(std::size_t row) const;

  void save(const std::filesystem::path& path) const;
  /// Throws on I/O failure, bad magic, unsupported version, truncation, or a
  /// dim/mode that disagrees with `config`. candidate_budget is taken from
  /// `config`; everything else comes from the file.
  static VectorIndex load(const std::filesystem::path& path, const IndexConfig& config);

 private:
  VectorIndex() = default;

  void assign_prefixes();
  void rank_ids();
  std::vector<std::uint32_t> pivot_order(std::span<const double> query) const;
  NeighborList exact_scan(std::span<const double> query, std::size_t k) const;
  NeighborList perm_prefix_scan(std::span<const double> query, std::size_t k, std::size_t budget) const;
  NeighborList finish(std::vector<std::pair<double, std::uint32_t>> best) const;

  IndexConfig config_;
  std::vector<ImageId> ids_;
  std::vector<float> data_;  // row-major, size() x dim
  std::vector<std::uint32_t> id_rank_;  // position of each row's id in sorted id order
  std::vector<std::uint32_t> pivot_rows_;
  std::vector<float> pivots_;  // num_pivots x dim
  std::vector<std::uint32_t> prefixes_;  // size() x prefix_len
};

inline VectorIndex build_index(std::vector<FeatureVector> vectors, const IndexConfig& config) {
  return VectorIndex::build(std::move(vectors), config);
}
inline void save_index(const VectorIndex& index, const std::filesystem::path& path) { index.save(path); }
inline VectorIndex load_index(const std::filesystem::path& path, const IndexConfig& config) {
  return VectorIndex::load(path, config);
}

}  // namespace simanno
