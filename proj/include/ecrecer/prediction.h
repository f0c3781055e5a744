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

#ifndef ECRECER_PREDICTION_H_
#define ECRECER_PREDICTION_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ecrecer/ec_number.h"

namespace ecrecer {

enum class PredictionSource { Alignment, Agents, External };

std::string_view to_string(PredictionSource s);
PredictionSource parse_prediction_source(std::string_view s);

struct ScoredEc {
  ECNumber ec;
  double score = 0.0;

  friend bool operator==(const ScoredEc&, const ScoredEc&) = default;
};

// Integrated per-sequence output. `abstained` marks a tool that declined to
// answer; such rows count as unclassified samples during evaluation.
struct Prediction {
  std::string id;
  bool is_enzyme = false;
  int function_count = 0;
  std::vector<ScoredEc> ranked_ecs;
  PredictionSource source = PredictionSource::Agents;
  bool abstained = false;

  std::vector<ECNumber> ecs() const;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Prediction TSV: header then one row per prediction with columns
// id, is_enzyme, function_count, ecs, scores, source. Abstentions leave
// is_enzyme and function_count blank.
void write_prediction_header(std::ostream& out);
void write_prediction_row(std::ostream& out, const Prediction& p);
void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);

// Reads either the prediction TSV above (detected by its header) or the
// three-column external form "id, isEnzyme-or-blank, EC-list-or-blank".
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> load_external_predictions(const std::string& path);

}  // namespace ecrecer

#endif  // ECRECER_PREDICTION_H_
