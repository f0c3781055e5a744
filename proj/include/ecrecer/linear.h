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

#ifndef ECRECER_LINEAR_H_
#define ECRECER_LINEAR_H_

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ecrecer/feature_matrix.h"

namespace ecrecer {

enum class LinearKind : uint32_t { L2Svm = 0, Logistic = 1 };

struct LinearTrainMeta {
  double cost = 0.0;  // C for the SVM, l2 strength for logistic regression
  int iterations = 0;
  double final_objective = 0.0;
  // Dual objective after each sweep (SVM) or primal objective after each
  // step (logistic). Not serialized.
  std::vector<double> objective_history;
};

// Sparse linear scorer w.x + b. Weight entries are sorted by feature index
// and never hold an explicit zero.
struct LinearModel {
  size_t dim = 0;
  std::vector<std::pair<uint32_t, double>> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::L2Svm;
  LinearTrainMeta meta;

  double weight(uint32_t feature) const;
  std::vector<double> dense_weights() const;
};

struct L2SvmParams {
  double c = 1.0;
  int max_iter = 1200;
  double tol = 0.1;
  uint64_t seed = 0;
};

// L2-regularized squared-hinge SVM, min 1/2|w|^2 + C sum max(0, 1 - y w.x)^2,
// solved by dual coordinate descent over a seeded random permutation per
// sweep. The bias is the weight of an appended constant-1 feature and is
// regularized with the rest. Stops after max_iter sweeps or once every
// projected gradient is below tol in magnitude. Positives get y = +1.
LinearModel train_l2svm(const RowList& positives, const RowList& negatives,
                        const L2SvmParams& params = {});

// Primal squared-hinge objective of `model` on the given data; the bias is
// treated as a regularized weight, matching train_l2svm.
double l2svm_primal_objective(const LinearModel& model, const RowList& positives,
                              const RowList& negatives, double c);

struct LogisticParams {
  double l2 = 1.0;
  int max_iter = 1000;
  double tol = 1e-4;
};

// Minimizes sum log(1 + exp(-t_i (w.x_i + b))) + l2/2 |w|^2 (t_i = +/-1, bias
// unregularized) by gradient descent with Armijo backtracking. Converged
// when the full gradient norm drops below tol.
LinearModel train_logistic(const RowList& x, const std::vector<int>& y,
                           const LogisticParams& params = {});

// Objective and gradient of train_logistic at (w, b). The gradient has
// dim + 1 entries, the last one for the bias.
double logistic_objective(const RowList& x, const std::vector<int>& y, double l2,
                          const std::vector<double>& w, double b);
std::vector<double> logistic_gradient(const RowList& x, const std::vector<int>& y, double l2,
                                      const std::vector<double>& w, double b);

// Drops weights with |w| < threshold; the bias is kept.
LinearModel sparsify(const LinearModel& model, double threshold);

// w.x + b. Throws InvalidArgument on a dimension mismatch.
double decision(const LinearModel& model, Row x);
double sigmoid(double z);
// sigmoid(decision(model, x)).
double probability(const LinearModel& model, Row x);

void save_linear_model(std::ostream& out, const LinearModel& model);
LinearModel load_linear_model(std::istream& in);

}  // namespace ecrecer

#endif  // ECRECER_LINEAR_H_
