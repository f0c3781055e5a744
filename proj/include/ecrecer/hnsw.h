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

#ifndef ECRECER_HNSW_H_
#define ECRECER_HNSW_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ecrecer/feature_matrix.h"

namespace ecrecer {

enum class Metric { Euclidean, Cosine };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

// Euclidean distance or cosine distance (1 - cos). A zero vector has cosine
// distance 1 to everything.
double distance(Row a, Row b, Metric metric);

struct Neighbor {
  uint32_t id = 0;  // row index in the indexed matrix
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Exact k nearest rows by linear scan, ascending distance, ties by id. k is
// clamped to the number of rows.
std::vector<Neighbor> brute_force_knn(const FeatureMatrix& data, Row query, size_t k,
                                      Metric metric = Metric::Euclidean);

struct HnswParams {
  size_t m = 16;  // max links per node on upper layers; layer 0 allows 2m
  size_t ef_construction = 200;
  Metric metric = Metric::Euclidean;
};

struct HnswBuildOptions {
  // Re-checks degree and layer invariants after every insertion.
  bool verify_each_insert = false;
};

// Hierarchical navigable small-world graph over the rows of a matrix. Node
// ids are row indices. Built single-threaded in row order; the result is a
// function of (data, params, seed). Search is const and thread-safe.
class AnnIndex {
 public:
  AnnIndex() = default;

  static AnnIndex build(FeatureMatrix data, const HnswParams& params, uint64_t seed,
                        const HnswBuildOptions& options = {});

  // k nearest candidates, ascending by exact distance then id. ef_search is
  // raised to k when smaller. k larger than size() returns every reachable node.
  std::vector<Neighbor> search(Row query, size_t k, size_t ef_search) const;

  size_t size() const { return data_.rows(); }
  size_t dim() const { return data_.cols(); }
  const HnswParams& params() const { return params_; }
  const FeatureMatrix& data() const { return data_; }
  uint32_t entry_point() const { return entry_point_; }
  int max_level() const { return max_level_; }
  int level_of(uint32_t node) const { return levels_[node]; }
  const std::vector<uint32_t>& links(uint32_t node, int layer) const {
    return links_[node][static_cast<size_t>(layer)];
  }
  size_t max_degree(int layer) const { return layer == 0 ? 2 * params_.m : params_.m; }

  // Throws Error describing the first violated degree/layer invariant.
  void check_invariants() const;
  // Number of nodes on `layer` reachable from the entry point along that
  // layer's edges.
  size_t reachable_on_layer(int layer) const;

  void save(std::ostream& out) const;
  // Validates structure (degree bounds, layer membership) on load.
  static AnnIndex load(std::istream& in);

 private:
  struct Candidate {
    double dist;
    uint32_t id;
  };

  double dist(Row a, uint32_t node) const;
  double dist(uint32_t a, uint32_t b) const;
  std::vector<Candidate> search_layer(Row query, const std::vector<Candidate>& entry,
                                      size_t ef, int layer) const;
  std::vector<uint32_t> select_neighbors(std::vector<Candidate> candidates, size_t m) const;
  void insert(uint32_t node, int level);

  HnswParams params_;
  FeatureMatrix data_;
  std::vector<double> norms_;  // cosine only
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<uint32_t>>> links_;
  uint32_t entry_point_ = 0;
  int max_level_ = -1;
};

}  // namespace ecrecer

#endif  // ECRECER_HNSW_H_
