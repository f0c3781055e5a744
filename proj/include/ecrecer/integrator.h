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

#ifndef ECRECER_INTEGRATOR_H_
#define ECRECER_INTEGRATOR_H_

#include <optional>
#include <string>
#include <vector>

#include "ecrecer/agents.h"
#include "ecrecer/alignment.h"
#include "ecrecer/label_dictionary.h"
#include "ecrecer/prediction.h"
#include "ecrecer/protein.h"

namespace ecrecer {

struct IntegrationPolicy {
  double alignment_min_identity = 0.4;
  // Sources consulted in order; each of Alignment / Agents at most once.
  std::vector<PredictionSource> precedence{PredictionSource::Alignment,
                                           PredictionSource::Agents};
  double agent1_threshold = 0.5;
  // Prediction mode keeps as many ECs as agent 2's count; off keeps one.
  bool use_count_hint = true;

  // Throws InvalidArgument on out-of-range thresholds or a bad precedence.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const IntegrationPolicy&, const IntegrationPolicy&) = default;
};

// Everything the integrator needs about one query.
struct QueryEvidence {
  std::string id;
  Agent1Output ag1;
  int ag2 = 1;
  std::vector<ScoredEc> ag3;  // ranked, at least kRecommendationSize long when available
  std::optional<Hit> hit;
};

// Walks the precedence list. Alignment answers when a hit reaches the
// identity threshold (labels transferred verbatim). Agents answer always:
// non-enzyme when agent 1 says so with confidence >= agent1_threshold,
// otherwise agent 2's count and the top of agent 3's ranking. When no
// source answers, the prediction abstains.
Prediction integrate(const QueryEvidence& evidence, const IntegrationPolicy& policy,
                     OutputMode mode = OutputMode::Prediction);

enum class TuneObjective { EcMicroF1, EnzymeF1 };

struct TuneGrid {
  std::vector<double> identities{0.4, 0.6, 0.9, 1.0};
  std::vector<double> agent1_thresholds{0.5, 0.7, 0.9};
  std::vector<std::vector<PredictionSource>> precedences{
      {PredictionSource::Alignment, PredictionSource::Agents},
      {PredictionSource::Agents, PredictionSource::Alignment},
      {PredictionSource::Alignment},
      {PredictionSource::Agents}};
  bool use_count_hint = true;
  // Extra refinement candidates taken from the evidence (hit identities,
  // agent 1 confidences), capped to this many evenly spaced values per field.
  size_t max_data_candidates = 64;
};

struct ScoredPolicy {
  IntegrationPolicy policy;
  double score = 0.0;
};

struct TuneResult {
  IntegrationPolicy best;
  double best_score = 0.0;
  std::vector<ScoredPolicy> scoreboard;  // every grid point, grid order
  std::vector<double> history;           // accepted objective after each step
};

double policy_score(const std::vector<QueryEvidence>& evidence,
                    const std::vector<ProteinRecord>& gold, const IntegrationPolicy& policy,
                    TuneObjective objective, const LabelDictionary* dictionary = nullptr);

// Scores every grid point, starts from the best (earliest on ties), then
// refines one field at a time accepting strict improvements only.
// Throws InvalidArgument on empty validation data or an empty grid.
TuneResult greedy_tune(const std::vector<QueryEvidence>& evidence,
                       const std::vector<ProteinRecord>& gold, const TuneGrid& grid = {},
                       TuneObjective objective = TuneObjective::EcMicroF1,
                       const LabelDictionary* dictionary = nullptr);

}  // namespace ecrecer

#endif  // ECRECER_INTEGRATOR_H_
