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

#include "ecrecer/embedding_select.h"

#include <algorithm>
#include <map>

#include "ecrecer/error.h"
#include "ecrecer/hnsw.h"
#include "ecrecer/metrics.h"

namespace ecrecer {
namespace {

std::string class_key(const ProteinRecord& r, Task task) {
  switch (task) {
    case Task::EnzymeOrNot: return r.is_enzyme ? "1" : "0";
    case Task::FunctionCount: return std::to_string(r.function_count);
    case Task::ECNumber: {
      auto ecs = r.ecs;
      std::sort(ecs.begin(), ecs.end(), ec_text_less);
      return format_ec_list(ecs);
    }
  }
  return {};
}

RowList rows_of(const EmbeddingTable& t, const std::vector<ProteinRecord>& records) {
  RowList rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    auto row = t.find(r.id);
    if (!row) {
      throw InvalidArgument("embedding table " + t.tag().to_string() + " has no vector for id " +
                            r.id);
    }
    rows.push_back(*row);
  }
  return rows;
}

// Returns predicted class indices for the validation rows; -1 = none.
std::vector<int> fit_predict(const RowList& train, const std::vector<int>& y, int classes,
                             const RowList& test, const LearnerSpec& spec) {
  std::vector<int> out;
  out.reserve(test.size());
  switch (spec.kind) {
    case BaselineLearner::Knn: {
      FeatureMatrix m(0, train.front().size());
      for (Row r : train) m.append(r);
      const size_t k = static_cast<size_t>(std::max(spec.n_neighbors, 1));
      for (Row q : test) {
        auto nbrs = brute_force_knn(m, q, k, Metric::Euclidean);
        std::vector<double> votes(static_cast<size_t>(classes), 0.0);
        bool exact = std::any_of(nbrs.begin(), nbrs.end(),
                                 [](const Neighbor& n) { return n.distance == 0.0; });
        for (const auto& n : nbrs) {
          if (exact && n.distance != 0.0) continue;
          votes[static_cast<size_t>(y[n.id])] += exact ? 1.0 : 1.0 / n.distance;
        }
        out.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                                       votes.begin()));
      }
      break;
    }
    case BaselineLearner::Logistic: {
      std::vector<LinearModel> models;
      int fitted = classes == 2 ? 1 : classes;
      for (int c = 0; c < fitted; ++c) {
        std::vector<int> t(y.size());
        for (size_t i = 0; i < y.size(); ++i) t[i] = y[i] == (classes == 2 ? 1 : c) ? 1 : 0;
        models.push_back(train_logistic(train, t, spec.logistic));
      }
      for (Row q : test) {
        if (classes == 2) {
          out.push_back(probability(models[0], q) > 0.5 ? 1 : 0);
          continue;
        }
        int best = 0;
        double best_s = decision(models[0], q);
        for (int c = 1; c < classes; ++c) {
          double s = decision(models[static_cast<size_t>(c)], q);
          if (s > best_s) {
            best_s = s;
            best = c;
          }
        }
        out.push_back(best);
      }
      break;
    }
    case BaselineLearner::Gbdt: {
      auto model = train_gbdt(train, y, classes, spec.gbdt);
      for (Row q : test) out.push_back(predict_gbdt(model, q).label);
      break;
    }
  }
  return out;
}

}  // namespace

SelectionResult select_embedding(const std::vector<const EmbeddingTable*>& tables, Task task,
                                 const DatasetSplit& split, const LearnerSpec& learner) {
  if (tables.empty()) throw InvalidArgument("no embedding tables to choose from");
  if (split.train.empty() || split.test.empty()) {
    throw InvalidArgument("selection needs non-empty train and validation parts");
  }
  // Class indices follow sorted keys; the enzyme task keeps 0 = non-enzyme.
  std::map<std::string, int> classes;
  for (const auto& r : split.train) classes.emplace(class_key(r, task), 0);
  int next = 0;
  for (auto& [key, idx] : classes) idx = next++;
  std::vector<int> y;
  for (const auto& r : split.train) y.push_back(classes.at(class_key(r, task)));
  if (task == Task::EnzymeOrNot && classes.size() != 2) {
    throw InvalidArgument("enzyme task selection needs both classes in the train part");
  }
  std::vector<std::string> names(classes.size());
  for (const auto& [key, idx] : classes) names[static_cast<size_t>(idx)] = key;

  SelectionResult res;
  for (const EmbeddingTable* t : tables) {
    RowList train = rows_of(*t, split.train);
    RowList test = rows_of(*t, split.test);
    std::vector<int> pred;
    if (classes.size() == 1) {
      pred.assign(test.size(), 0);
    } else {
      pred = fit_predict(train, y, static_cast<int>(classes.size()), test, learner);
    }
    double score = 0.0;
    if (task == Task::EnzymeOrNot) {
      ConfusionCounts c;
      for (size_t i = 0; i < test.size(); ++i) {
        bool gold = split.test[i].is_enzyme;
        bool p = pred[i] == 1;
        ++(gold ? (p ? c.tp : c.fn) : (p ? c.fp : c.tn));
      }
      score = binary_metrics(c).f1.value_or(0.0);
    } else {
      std::map<std::string, ConfusionCounts> per;
      for (size_t i = 0; i < test.size(); ++i) {
        const std::string g = class_key(split.test[i], task);
        const std::string& p = names[static_cast<size_t>(pred[i])];
        per[g];
        per[p];
        if (g == p) {
          ++per[g].tp;
        } else {
          ++per[g].fn;
          ++per[p].fp;
        }
      }
      std::vector<ConfusionCounts> counts;
      for (auto& [key, c] : per) {
        c.tn = test.size() - c.tp - c.fp - c.fn;
        counts.push_back(c);
      }
      score = macro_metrics(counts).mf1_perclass;
    }
    res.scoreboard.push_back({t->tag(), t->dim(), score});
  }
  const ScoreboardEntry* best = &res.scoreboard.front();
  for (const auto& e : res.scoreboard) {
    bool better = e.score > best->score ||
                  (e.score == best->score &&
                   (e.dim < best->dim || (e.dim == best->dim && e.tag < best->tag)));
    if (better) best = &e;
  }
  for (const auto& e : res.scoreboard) {
    if (e.score > best->score) throw Error("selected embedding is not the best scoring one");
  }
  res.best = best->tag;
  return res;
}

}  // namespace ecrecer
