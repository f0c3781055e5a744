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

#ifndef ECRECER_EMBEDDING_SELECT_H_
#define ECRECER_EMBEDDING_SELECT_H_

#include <vector>

#include "ecrecer/embedding.h"
#include "ecrecer/gbdt.h"
#include "ecrecer/linear.h"
#include "ecrecer/split.h"
#include "ecrecer/task.h"

namespace ecrecer {

enum class BaselineLearner { Knn, Logistic, Gbdt };

struct LearnerSpec {
  BaselineLearner kind = BaselineLearner::Knn;
  int n_neighbors = 5;          // Knn, distance weighted
  LogisticParams logistic;      // Logistic, one-vs-rest for multiclass
  GbdtParams gbdt{30, 4, 1.0, 1.0, 1.0, 0.3, 0};
};

struct ScoreboardEntry {
  EmbeddingTag tag;
  size_t dim = 0;
  double score = 0.0;
};

struct SelectionResult {
  EmbeddingTag best;
  std::vector<ScoreboardEntry> scoreboard;  // input order
};

// Trains `learner` per table on split.train and scores split.test: enzyme F1
// for the enzyme task, per-class macro F1 otherwise (EC task classes are the
// full EC set of a record). Ties go to the smaller dim, then the earlier tag.
// Throws InvalidArgument when a table lacks an id, naming both.
SelectionResult select_embedding(const std::vector<const EmbeddingTable*>& tables, Task task,
                                 const DatasetSplit& split, const LearnerSpec& learner = {});

}  // namespace ecrecer

#endif  // ECRECER_EMBEDDING_SELECT_H_
