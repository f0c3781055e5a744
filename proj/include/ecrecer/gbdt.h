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

#ifndef ECRECER_GBDT_H_
#define ECRECER_GBDT_H_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ecrecer/feature_matrix.h"

namespace ecrecer {

struct GbdtParams {
  int n_estimators = 120;
  int max_depth = 6;
  double min_child_weight = 6.0;
  double subsample = 0.5;
  double lambda = 1.0;
  double learning_rate = 0.3;
  uint64_t seed = 0;
};

// Internal nodes route x[feature] < threshold to `left`.
struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  float threshold = 0.0f;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;         // leaf output, already scaled by the learning rate
  double hessian_sum = 0.0;
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(Row x) const;
  int depth() const;
};

// Softmax multiclass boosted trees. trees[round * classes + k] scores class k.
struct GbdtModel {
  int classes = 0;
  int rounds = 0;
  size_t dim = 0;
  GbdtParams params;
  std::vector<RegressionTree> trees;
  // Training-set misclassification rate after each round (not serialized).
  std::vector<double> train_error_history;

  const RegressionTree& tree(int round, int k) const {
    return trees[static_cast<size_t>(round * classes + k)];
  }
};

// Per round: softmax gradients g = p - 1[y=k] and hessians h = p(1-p); one
// regression tree per class over a Bernoulli(subsample) row sample, grown
// level-wise with exact greedy splits maximizing
//   1/2 [GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)],
// children constrained to hessian sum >= min_child_weight, positive gain
// only. Leaves output -learning_rate * G / (H + lambda).
// Throws InvalidArgument when K < 2 or a class in 0..K-1 has no rows.
GbdtModel train_gbdt(const RowList& x, const std::vector<int>& y, int classes,
                     const GbdtParams& params = {});

struct GbdtPrediction {
  int label = 0;
  std::vector<double> probabilities;
};

std::vector<double> predict_margins(const GbdtModel& model, Row x);
// Softmax over summed leaf values; argmax ties go to the smaller class.
GbdtPrediction predict_gbdt(const GbdtModel& model, Row x);

void save_gbdt(std::ostream& out, const GbdtModel& model);
GbdtModel load_gbdt(std::istream& in);
// One line per node.
void dump_gbdt_text(std::ostream& out, const GbdtModel& model);

}  // namespace ecrecer

#endif  // ECRECER_GBDT_H_
