/*
 * Copyright 2026 The ECRECer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ecrecer/error.h"
#include "ecrecer/hnsw.h"
#include "test_util.h"

namespace ecrecer {
namespace {

double recall_at(const AnnIndex& index, const FeatureMatrix& queries, size_t k, size_t ef) {
  size_t found = 0;
  for (size_t q = 0; q < queries.rows(); ++q) {
    auto truth = brute_force_knn(index.data(), queries.row(q), k);
    auto got = index.search(queries.row(q), k, ef);
    std::set<uint32_t> ids;
    for (const auto& n : got) ids.insert(n.id);
    for (const auto& n : truth) found += ids.count(n.id);
  }
  return static_cast<double>(found) / static_cast<double>(k * queries.rows());
}

TEST(BruteForce, CollinearOrdering) {
  FeatureMatrix m(0, 1);
  for (float x : {0.0f, 1.0f, 3.0f}) m.append(std::vector<float>{x});
  std::vector<float> q{0.0f};
  auto n = brute_force_knn(m, q, 3);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].id, 0u);
  EXPECT_EQ(n[1].id, 1u);
  EXPECT_EQ(n[2].id, 2u);
  EXPECT_DOUBLE_EQ(n[2].distance, 3.0);
}

TEST(BruteForce, DuplicateTieGoesToSmallestId) {
  FeatureMatrix m(0, 2);
  for (int i = 0; i < 4; ++i) m.append(std::vector<float>{1.0f, 1.0f});
  auto n = brute_force_knn(m, std::vector<float>{1.0f, 1.0f}, 1);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].id, 0u);
}

TEST(BruteForce, CosineDistance) {
  FeatureMatrix m(0, 2);
  m.append(std::vector<float>{1, 0});
  m.append(std::vector<float>{0, 5});
  auto n = brute_force_knn(m, std::vector<float>{0, 1}, 2, Metric::Cosine);
  EXPECT_EQ(n[0].id, 1u);
  EXPECT_NEAR(n[0].distance, 0.0, 1e-12);
  EXPECT_NEAR(n[1].distance, 1.0, 1e-12);
}

TEST(Hnsw, SinglePoint) {
  FeatureMatrix m(0, 3);
  m.append(std::vector<float>{1, 2, 3});
  auto idx = AnnIndex::build(m, {}, 0);
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.entry_point(), 0u);
  auto r = idx.search(m.row(0), 5, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 0u);
}

TEST(Hnsw, RejectsDegenerateInput) {
  EXPECT_THROW(AnnIndex::build(FeatureMatrix(3, 0), {}, 0), InvalidArgument);
  EXPECT_THROW(AnnIndex::build(FeatureMatrix(0, 3), {}, 0), InvalidArgument);
  HnswParams p;
  p.m = 1;
  EXPECT_THROW(AnnIndex::build(FeatureMatrix(2, 3), p, 0), InvalidArgument);
}

TEST(Hnsw, LayerZeroDegreeBound) {
  std::mt19937_64 rng(21);
  auto data = testing::uniform_points(2000, 64, rng);
  auto idx = AnnIndex::build(data, {16, 200, Metric::Euclidean}, 7);
  for (uint32_t node = 0; node < idx.size(); ++node) {
    EXPECT_LE(idx.links(node, 0).size(), 32u);
    for (int l = 1; l <= idx.level_of(node); ++l) EXPECT_LE(idx.links(node, l).size(), 16u);
  }
  EXPECT_NO_THROW(idx.check_invariants());
}

TEST(Hnsw, InvariantsHoldAfterEveryInsertion) {
  std::mt19937_64 rng(22);
  auto data = testing::uniform_points(400, 8, rng);
  HnswBuildOptions opts;
  opts.verify_each_insert = true;
  EXPECT_NO_THROW(AnnIndex::build(data, {4, 32, Metric::Euclidean}, 3, opts));
}

TEST(Hnsw, EveryLayerConnectedFromEntryPoint) {
  std::mt19937_64 rng(23);
  auto data = testing::uniform_points(256, 6, rng);
  auto idx = AnnIndex::build(data, {6, 64, Metric::Euclidean}, 5);
  for (int layer = 0; layer <= idx.max_level(); ++layer) {
    size_t members = 0;
    for (uint32_t n = 0; n < idx.size(); ++n) members += idx.level_of(n) >= layer;
    EXPECT_EQ(idx.reachable_on_layer(layer), members) << "layer " << layer;
  }
}

TEST(Hnsw, ExactQueryFirst) {
  std::mt19937_64 rng(24);
  auto data = testing::uniform_points(500, 16, rng);
  auto idx = AnnIndex::build(data, {}, 1);
  for (uint32_t i = 0; i < 50; ++i) {
    auto r = idx.search(data.row(i), 3, 50);
    ASSERT_FALSE(r.empty());
    EXPECT_EQ(r[0].id, i);
    EXPECT_EQ(r[0].distance, 0.0);
  }
}

TEST(Hnsw, FullEfMatchesBruteForceOnSmallSets) {
  std::mt19937_64 rng(25);
  for (size_t n : {17, 100, 256}) {
    auto data = testing::uniform_points(n, 5, rng);
    auto idx = AnnIndex::build(data, {8, 100, Metric::Euclidean}, 2);
    auto queries = testing::uniform_points(20, 5, rng);
    for (size_t q = 0; q < queries.rows(); ++q) {
      auto exact = brute_force_knn(data, queries.row(q), n);
      auto got = idx.search(queries.row(q), n, n);
      EXPECT_EQ(got, exact);
    }
  }
}

TEST(Hnsw, KLargerThanIndexReturnsAll) {
  std::mt19937_64 rng(26);
  auto data = testing::uniform_points(30, 4, rng);
  auto idx = AnnIndex::build(data, {}, 0);
  EXPECT_EQ(idx.search(data.row(0), 100, 10).size(), 30u);
}

TEST(Hnsw, ResultsSortedWithExactDistances) {
  std::mt19937_64 rng(27);
  auto data = testing::uniform_points(800, 12, rng);
  auto idx = AnnIndex::build(data, {}, 4);
  auto queries = testing::uniform_points(20, 12, rng);
  for (size_t q = 0; q < queries.rows(); ++q) {
    auto r = idx.search(queries.row(q), 10, 40);
    for (size_t i = 0; i < r.size(); ++i) {
      EXPECT_DOUBLE_EQ(r[i].distance, distance(queries.row(q), data.row(r[i].id), Metric::Euclidean));
      if (i) {
        EXPECT_TRUE(r[i - 1].distance < r[i].distance ||
                    (r[i - 1].distance == r[i].distance && r[i - 1].id < r[i].id));
      }
    }
  }
}

TEST(Hnsw, RecallGrowsWithEf) {
  std::mt19937_64 rng(28);
  auto data = testing::uniform_points(3000, 32, rng);
  auto idx = AnnIndex::build(data, {8, 40, Metric::Euclidean}, 9);
  auto queries = testing::uniform_points(40, 32, rng);
  double prev = 0.0;
  for (size_t ef : {10, 20, 40, 80, 160, 320}) {
    double r = recall_at(idx, queries, 10, ef);
    EXPECT_GE(r + 1e-9, prev) << "ef " << ef;
    prev = r;
  }
  EXPECT_GT(prev, 0.9);
}

TEST(Hnsw, DeterministicForSeed) {
  std::mt19937_64 rng(29);
  auto data = testing::uniform_points(300, 8, rng);
  std::stringstream a, b;
  AnnIndex::build(data, {}, 11).save(a);
  AnnIndex::build(data, {}, 11).save(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Hnsw, SaveLoadRoundTrip) {
  std::mt19937_64 rng(30);
  auto data = testing::uniform_points(300, 8, rng);
  auto idx = AnnIndex::build(data, {}, 12);
  std::stringstream s;
  idx.save(s);
  auto back = AnnIndex::load(s);
  auto q = testing::uniform_points(5, 8, rng);
  for (size_t i = 0; i < q.rows(); ++i) EXPECT_EQ(back.search(q.row(i), 5, 30), idx.search(q.row(i), 5, 30));
  std::stringstream again;
  back.save(again);
  EXPECT_EQ(again.str(), s.str());
}

TEST(Hnsw, LoadRejectsCorruptDegree) {
  std::mt19937_64 rng(31);
  auto data = testing::uniform_points(50, 4, rng);
  std::stringstream s;
  AnnIndex::build(data, {}, 0).save(s);
  std::string bytes = s.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(AnnIndex::load(truncated), SerializationError);
  std::stringstream wrong("NOTANIDX0000");
  EXPECT_THROW(AnnIndex::load(wrong), SerializationError);
}

TEST(Hnsw, LargeDegreeParametersAccepted) {
  std::mt19937_64 rng(32);
  auto data = testing::uniform_points(300, 8, rng);
  auto idx = AnnIndex::build(data, {100, 300, Metric::Euclidean}, 0);
  EXPECT_NO_THROW(idx.check_invariants());
  EXPECT_EQ(idx.search(data.row(5), 1, 300)[0].id, 5u);
}

TEST(Hnsw, CosineMetric) {
  std::mt19937_64 rng(33);
  auto data = testing::uniform_points(500, 10, rng, -1, 1);
  auto idx = AnnIndex::build(data, {16, 100, Metric::Cosine}, 0);
  auto q = testing::uniform_points(10, 10, rng, -1, 1);
  for (size_t i = 0; i < q.rows(); ++i) {
    auto exact = brute_force_knn(data, q.row(i), 5, Metric::Cosine);
    auto got = idx.search(q.row(i), 5, 200);
    EXPECT_EQ(got.front().id, exact.front().id);
  }
}

}  // namespace
}  // namespace ecrecer
