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

#ifndef ECRECER_AGENTS_H_
#define ECRECER_AGENTS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ecrecer/embedding.h"
#include "ecrecer/gbdt.h"
#include "ecrecer/hnsw.h"
#include "ecrecer/label_dictionary.h"
#include "ecrecer/linear.h"
#include "ecrecer/prediction.h"
#include "ecrecer/protein.h"

namespace ecrecer {

// ---------------------------------------------------------------------------
// Agent 1: enzyme vs. non-enzyme by distance-weighted k nearest neighbours.

struct Agent1Params {
  int n_neighbors = 5;
  Metric metric = Metric::Euclidean;
  // Training sets below this size are scanned exactly; larger ones go
  // through an HNSW index searched with ef = max(ef_search, 10 * n_neighbors).
  size_t exact_scan_limit = 50000;
  HnswParams ann{16, 200, Metric::Euclidean};
  size_t ef_search = 0;
  uint64_t seed = 0;
};

struct Agent1Model {
  Agent1Params params;
  FeatureMatrix train;          // used by the exact scan
  std::optional<AnnIndex> ann;  // used above exact_scan_limit
  std::vector<uint8_t> labels;  // 1 = enzyme

  size_t size() const { return labels.size(); }
  size_t dim() const { return ann ? ann->dim() : train.cols(); }
};

struct Agent1Output {
  bool is_enzyme = false;
  double confidence = 0.0;  // winning share of the neighbour vote
};

Agent1Model train_agent1(FeatureMatrix x, std::vector<uint8_t> labels,
                         const Agent1Params& params = {});
// Throws InvalidArgument when the table lacks a training id.
Agent1Model train_agent1(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const Agent1Params& params = {});

// Votes weighted by 1/distance. Neighbours at distance zero, when present,
// take the whole vote. Ties go to non-enzyme.
Agent1Output predict_agent1(const Agent1Model& model, Row x);

// ---------------------------------------------------------------------------
// Agent 2: function count. `sp` separates mono- from multifunctional
// enzymes; `mp` picks a count in 2..8 for the multifunctional ones.

struct Agent2Model {
  GbdtModel sp;
  std::optional<GbdtModel> mp;   // absent when a single multifunctional count was seen
  std::vector<int> mp_counts;    // mp class index -> function count, ascending

  size_t dim() const { return sp.dim; }
};

// Throws InvalidArgument on counts outside 1..8 or when no multifunctional
// rows exist.
Agent2Model train_agent2(const RowList& x, const std::vector<int>& counts,
                         const GbdtParams& params = {});
Agent2Model train_agent2(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const GbdtParams& params = {});

int predict_agent2(const Agent2Model& model, Row x);

// ---------------------------------------------------------------------------
// Agent 3: extreme multi-label EC classifier. One L2-SVM per label trained
// against negatives sampled from the label's positives' nearest neighbours,
// scored at prediction time over the labels of the query's nearest
// training points.

struct Agent3Params {
  HnswParams ann{100, 300, Metric::Euclidean};
  size_t ef_search = 300;
  size_t negative_budget = 700;  // k: nearest-neighbour samples per label
  size_t shortlist_size = 700;   // nearest training points consulted at prediction
  L2SvmParams svm{1.0, 1200, 0.1, 0};
  double sparsify_threshold = 1e-6;
  uint64_t seed = 0;
  int threads = 1;
};

struct Agent3Stats {
  size_t total_negatives = 0;
  size_t max_negatives = 0;
  size_t labels_without_negatives = 0;
};

struct Agent3Model {
  Agent3Params params;
  LabelDictionary dictionary;
  std::vector<LinearModel> classifiers;           // indexed by label
  AnnIndex ann;                                   // over training points
  std::vector<std::vector<Label>> point_labels;   // training point -> labels
  Agent3Stats stats;

  size_t dim() const { return ann.dim(); }
};

enum class OutputMode { Prediction, Recommendation };
inline constexpr size_t kRecommendationSize = 20;

// Each row of `x` is one training sequence carrying every label in
// `labels[i]`; a multifunctional sequence is a positive for each of its ECs.
Agent3Model train_agent3(FeatureMatrix x, std::vector<std::vector<Label>> labels,
                         LabelDictionary dictionary, const Agent3Params& params = {});
// Enzymes only; the dictionary is built from the records' ECs.
Agent3Model train_agent3(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const Agent3Params& params = {});

// Scores sigmoid(w.x + b) for every label in the shortlist, sorted by score
// descending then canonical EC text. Prediction mode keeps count_hint
// entries, recommendation mode up to 20.
std::vector<ScoredEc> predict_agent3(const Agent3Model& model, Row x, OutputMode mode,
                                     size_t count_hint = 1);

void save_agent1(std::ostream& out, const Agent1Model& m);
Agent1Model load_agent1(std::istream& in);
void save_agent2(std::ostream& out, const Agent2Model& m);
Agent2Model load_agent2(std::istream& in);
void save_agent3(std::ostream& out, const Agent3Model& m);
Agent3Model load_agent3(std::istream& in);

}  // namespace ecrecer

#endif  // ECRECER_AGENTS_H_
