#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "knn_oracle.hpp"
#include "simanno/errors.hpp"
#include "simanno/feature_file.hpp"
#include "simanno/random.hpp"
#include "simanno/vector_index.hpp"
#include "test_support.hpp"

namespace simanno {
namespace {

using testing::oracle_knn;
using testing::same_neighbors;
using testing::TempDir;

std::vector<FeatureVector> random_vectors(Rng& rng, std::size_t n, std::size_t dim, const std::string& prefix = "v") {
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector v{prefix + std::to_string(i), std::vector<float>(dim)};
    for (auto& x : v.values) x = static_cast<float>(rng.normal());
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> random_query(Rng& rng, std::size_t dim) {
  std::vector<double> q(dim);
  for (auto& x : q) x = rng.normal();
  return q;
}

IndexConfig exact(std::size_t dim) {
  IndexConfig c;
  c.dim = dim;
  return c;
}

std::vector<FeatureVector> line_points() {
  return {{"a", {0.0f, 0.0f}}, {"b", {1.0f, 0.0f}}, {"c", {3.0f, 0.0f}}};
}

TEST(Distance, IdentityIsZero) {
  const std::vector<double> a{0, 0};
  EXPECT_EQ(distance(a, a), 0.0);
}

TEST(Distance, ThreeFourFive) {
  const std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_DOUBLE_EQ(distance(a, b), 5.0);
}

TEST(Distance, NearbyPoints) {
  const std::vector<double> a{0.9, 0}, b{1, 0};
  EXPECT_NEAR(distance(a, b), 0.1, 1e-12);
}

TEST(Distance, DimensionMismatchThrows) {
  const std::vector<double> a{0, 0}, b{1, 2, 3};
  EXPECT_THROW(distance(a, b), DimensionError);
}

TEST(Distance, Symmetric) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_query(rng, 17), b = random_query(rng, 17);
    EXPECT_EQ(distance(a, b), distance(b, a));
  }
}

TEST(BuildIndex, CountsVectors) {
  const auto index = build_index(line_points(), exact(2));
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.dim(), 2u);
}

TEST(BuildIndex, RejectsBadInput) {
  EXPECT_THROW(build_index({}, exact(2)), std::exception);
  EXPECT_THROW(build_index({{"a", {1.0f}}}, exact(2)), DimensionError);
  EXPECT_THROW(build_index({{"a", {1.0f, 2.0f}}, {"a", {0.0f, 0.0f}}}, exact(2)), std::exception);
  EXPECT_THROW(build_index({{"a", {NAN, 2.0f}}}, exact(2)), std::exception);
}

TEST(BuildIndex, PermPrefixPivotsAreDeterministic) {
  Rng rng(11);
  const auto data = random_vectors(rng, 100, 8);
  IndexConfig c = exact(8);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 8;
  c.prefix_len = 3;
  c.rng_seed = 1;
  const auto a = build_index(data, c);
  const auto b = build_index(data, c);
  ASSERT_EQ(a.pivot_rows().size(), 8u);
  EXPECT_TRUE(std::equal(a.pivot_rows().begin(), a.pivot_rows().end(), b.pivot_rows().begin()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    const auto pa = a.permutation_prefix(r), pb = b.permutation_prefix(r);
    ASSERT_EQ(pa.size(), 3u);
    EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin()));
  }
}

TEST(BuildIndex, InvalidPermPrefixConfig) {
  IndexConfig c = exact(2);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 4;
  c.prefix_len = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.prefix_len = 2;
  EXPECT_THROW(build_index(line_points(), c), std::exception);  // fewer vectors than pivots
}

TEST(Knn, SmallExample) {
  const auto index = build_index(line_points(), exact(2));
  const std::vector<double> q{0.9, 0.0};
  const auto result = index.knn(q, 2);
  ASSERT_EQ(result.size(), 2u);
  EXPECT_EQ(result[0].id, "b");
  EXPECT_NEAR(result[0].distance, 0.1, 1e-12);
  EXPECT_EQ(result[1].id, "a");
  EXPECT_NEAR(result[1].distance, 0.9, 1e-12);
}

TEST(Knn, StoredVectorIsAtDistanceZero) {
  const auto index = build_index(line_points(), exact(2));
  const std::vector<double> q{3.0, 0.0};
  const auto result = index.knn(q, 1);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_EQ(result[0].id, "c");
  EXPECT_EQ(result[0].distance, 0.0);
}

TEST(Knn, KLargerThanCountReturnsAll) {
  const auto index = build_index(line_points(), exact(2));
  const std::vector<double> q{0.0, 0.0};
  EXPECT_EQ(index.knn(q, 10).size(), 3u);
}

TEST(Knn, TiesBreakByAscendingId) {
  // Ids deliberately inserted out of order.
  std::vector<FeatureVector> data{{"z", {1, 0}}, {"m", {-1, 0}}, {"b", {0, 1}}, {"x", {0, -1}}, {"far", {5, 5}}};
  const auto index = build_index(data, exact(2));
  const std::vector<double> q{0, 0};
  const auto result = index.knn(q, 4);
  ASSERT_EQ(result.size(), 4u);
  EXPECT_EQ(result[0].id, "b");
  EXPECT_EQ(result[1].id, "m");
  EXPECT_EQ(result[2].id, "x");
  EXPECT_EQ(result[3].id, "z");
  EXPECT_EQ(index.knn(q, 2), (NeighborList{{"b", 1.0}, {"m", 1.0}}));
}

TEST(Knn, QueryDimensionMismatchThrows) {
  const auto index = build_index(line_points(), exact(2));
  const std::vector<double> q{1, 2, 3};
  EXPECT_THROW(index.knn(q, 1), DimensionError);
}

TEST(Knn, MatchesLinearScanOracleAtK70) {
  Rng rng(2024);
  const auto data = random_vectors(rng, 1000, 32);
  const auto index = build_index(data, exact(32));
  for (int t = 0; t < 20; ++t) {
    const auto q = random_query(rng, 32);
    EXPECT_TRUE(same_neighbors(index.knn(q, 70), oracle_knn(data, q, 70)));
  }
}

TEST(Knn, IntegerGridTiesMatchOracle) {
  // Small integers make every distance exact, so ties are real ties.
  Rng rng(7);
  std::vector<FeatureVector> data;
  for (int i = 0; i < 300; ++i) {
    FeatureVector v{"p" + std::to_string((i * 7919) % 1000), std::vector<float>(3)};
    for (auto& x : v.values) x = static_cast<float>(rng.below(4));
    data.push_back(std::move(v));
  }
  const auto index = build_index(data, exact(3));
  for (int t = 0; t < 30; ++t) {
    std::vector<double> q(3);
    for (auto& x : q) x = static_cast<double>(rng.below(4));
    for (std::size_t k : {1u, 5u, 40u}) EXPECT_TRUE(same_neighbors(index.knn(q, k), oracle_knn(data, q, k)));
  }
}

TEST(Knn, BatchEqualsSingleQueries) {
  Rng rng(99);
  const auto data = random_vectors(rng, 2000, 37);
  const auto index = build_index(data, exact(37));
  std::vector<std::vector<double>> queries;
  for (int t = 0; t < 23; ++t) queries.push_back(random_query(rng, 37));
  const auto batch = index.knn_batch(queries, 15);
  ASSERT_EQ(batch.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) EXPECT_EQ(batch[i], index.knn(queries[i], 15));
}

TEST(Knn, FloatAndDoubleQueriesAgree) {
  Rng rng(3);
  const auto data = random_vectors(rng, 200, 9);
  const auto index = build_index(data, exact(9));
  std::vector<float> qf(9);
  for (auto& x : qf) x = static_cast<float>(rng.normal());
  const std::vector<double> qd(qf.begin(), qf.end());
  EXPECT_EQ(index.knn(std::span<const float>(qf), 7), index.knn(qd, 7));
}

TEST(PermPrefix, FullBudgetEqualsExact) {
  Rng rng(21);
  const auto data = random_vectors(rng, 500, 16);
  IndexConfig c = exact(16);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 16;
  c.prefix_len = 4;
  c.rng_seed = 9;
  const auto index = build_index(data, c);
  for (int t = 0; t < 10; ++t) {
    const auto q = random_query(rng, 16);
    EXPECT_TRUE(same_neighbors(index.knn(q, 10, data.size()), oracle_knn(data, q, 10)));
  }
}

TEST(PermPrefix, BudgetBelowKThrows) {
  Rng rng(4);
  IndexConfig c = exact(4);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 4;
  c.prefix_len = 2;
  const auto index = build_index(random_vectors(rng, 50, 4), c);
  const auto q = random_query(rng, 4);
  EXPECT_THROW(index.knn(q, 10, 5), std::invalid_argument);
}

TEST(PermPrefix, RecallMonotoneInBudget) {
  Rng rng(8);
  const auto data = random_vectors(rng, 2000, 16);
  IndexConfig c = exact(16);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 32;
  c.prefix_len = 6;
  c.rng_seed = 3;
  const auto index = build_index(data, c);
  for (int t = 0; t < 10; ++t) {
    const auto q = random_query(rng, 16);
    const auto truth = oracle_knn(data, q, 10);
    std::size_t previous = 0;
    for (std::size_t budget : {10u, 50u, 100u, 400u, 1000u, 2000u}) {
      const auto found = index.knn(q, 10, budget);
      std::size_t hits = 0;
      for (const auto& n : found) {
        hits += std::count_if(truth.begin(), truth.end(), [&](const Neighbor& x) { return x.id == n.id; });
      }
      EXPECT_GE(hits, previous) << "budget " << budget;
      previous = hits;
    }
    EXPECT_EQ(previous, 10u);
  }
}

TEST(Persistence, RoundTripPreservesAnswers) {
  TempDir dir;
  Rng rng(12);
  const auto data = random_vectors(rng, 300, 12);
  for (auto mode : {IndexMode::exact, IndexMode::perm_prefix}) {
    IndexConfig c = exact(12);
    c.mode = mode;
    c.num_pivots = 10;
    c.prefix_len = 3;
    c.candidate_budget = 60;
    c.rng_seed = 5;
    const auto index = build_index(data, c);
    save_index(index, dir / "a.idx");
    const auto loaded = load_index(dir / "a.idx", c);
    ASSERT_EQ(loaded.size(), index.size());
    for (int t = 0; t < 50; ++t) {
      const auto q = random_query(rng, 12);
      EXPECT_EQ(loaded.knn(q, 8), index.knn(q, 8));
    }
  }
}

TEST(Persistence, SaveIsByteIdenticalPerSeed) {
  TempDir dir;
  Rng rng(13);
  const auto data = random_vectors(rng, 200, 6);
  IndexConfig c = exact(6);
  c.mode = IndexMode::perm_prefix;
  c.num_pivots = 12;
  c.prefix_len = 4;
  c.rng_seed = 77;
  build_index(data, c).save(dir / "a.idx");
  build_index(data, c).save(dir / "b.idx");
  EXPECT_EQ(testing::read_bytes(dir / "a.idx"), testing::read_bytes(dir / "b.idx"));
}

TEST(Persistence, TruncatedFileFails) {
  TempDir dir;
  build_index(line_points(), exact(2)).save(dir / "a.idx");
  const auto bytes = testing::read_bytes(dir / "a.idx");
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() - 1}) {
    testing::write_text(dir / "t.idx", bytes.substr(0, cut));
    EXPECT_THROW(load_index(dir / "t.idx", exact(2)), Error) << "cut at " << cut;
  }
}

TEST(Persistence, BadMagicFails) {
  TempDir dir;
  testing::write_text(dir / "bad.idx", "NOTANIDXFILE0000000000000000000000000");
  EXPECT_THROW(load_index(dir / "bad.idx", exact(2)), IoError);
}

TEST(Persistence, WrongDimFails) {
  TempDir dir;
  build_index(line_points(), exact(2)).save(dir / "a.idx");
  EXPECT_THROW(load_index(dir / "a.idx", exact(3)), DimensionError);
}

TEST(Persistence, MissingFileFails) {
  TempDir dir;
  EXPECT_THROW(load_index(dir / "none.idx", exact(2)), IoError);
}

TEST(FeatureFile, RoundTrip) {
  TempDir dir;
  Rng rng(1);
  const auto data = random_vectors(rng, 40, 5);
  write_features(dir / "f.fvec", 5, data);
  const auto back = read_features(dir / "f.fvec");
  ASSERT_EQ(back.dim, 5u);
  ASSERT_EQ(back.vectors.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.vectors[i].id, data[i].id);
    EXPECT_EQ(back.vectors[i].values, data[i].values);
  }
}

TEST(FeatureFile, RejectsMalformed) {
  TempDir dir;
  testing::write_text(dir / "a.fvec", "FVEC 1 2 1\n");
  EXPECT_THROW(read_features(dir / "a.fvec"), Error);  // record missing
  testing::write_text(dir / "b.fvec", "FVEC 2 2 0\n");
  EXPECT_THROW(read_features(dir / "b.fvec"), Error);  // version
  EXPECT_THROW(read_features(dir / "missing.fvec"), IoError);
}

}  // namespace
}  // namespace simanno
