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

#include "ecrecer/integrator.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ecrecer/error.h"
#include "ecrecer/metrics.h"

namespace ecrecer {
namespace {

std::vector<double> spaced_subset(std::vector<double> values, size_t cap) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (cap == 0 || values.size() <= cap) return values;
  std::vector<double> out;
  for (size_t i = 0; i < cap; ++i) {
    out.push_back(values[i * (values.size() - 1) / (cap - 1 == 0 ? 1 : cap - 1)]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> merge_candidates(const std::vector<double>& grid,
                                     const std::vector<double>& data) {
  std::vector<double> out = grid;
  for (double v : data) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

void IntegrationPolicy::validate() const {
  if (!(alignment_min_identity >= 0.0 && alignment_min_identity <= 1.0)) {
    throw InvalidArgument("alignment identity threshold outside [0, 1]");
  }
  if (!(agent1_threshold >= 0.0 && agent1_threshold <= 1.0)) {
    throw InvalidArgument("agent 1 threshold outside [0, 1]");
  }
  if (precedence.empty()) throw InvalidArgument("precedence is empty");
  std::set<PredictionSource> seen;
  for (auto s : precedence) {
    if (s == PredictionSource::External) {
      throw InvalidArgument("precedence may only name alignment and agents");
    }
    if (!seen.insert(s).second) throw InvalidArgument("precedence repeats a source");
  }
}

std::string IntegrationPolicy::describe() const {
  std::string order;
  for (auto s : precedence) {
    if (!order.empty()) order += '>';
    order += to_string(s);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "precedence=%s identity=%.4g agent1_threshold=%.4g count_hint=%s",
                order.c_str(), alignment_min_identity, agent1_threshold,
                use_count_hint ? "on" : "off");
  return buf;
}

Prediction integrate(const QueryEvidence& ev, const IntegrationPolicy& policy, OutputMode mode) {
  Prediction p;
  p.id = ev.id;
  for (auto source : policy.precedence) {
    if (source == PredictionSource::Alignment) {
      if (!ev.hit || ev.hit->identity < policy.alignment_min_identity) continue;
      auto t = transfer_labels(*ev.hit);
      p.is_enzyme = t.is_enzyme;
      p.function_count = t.function_count;
      for (const auto& ec : t.ecs) p.ranked_ecs.push_back({ec, ev.hit->identity});
      p.source = PredictionSource::Alignment;
      return p;
    }
    if (source == PredictionSource::Agents) {
      p.source = PredictionSource::Agents;
      if (!ev.ag1.is_enzyme && ev.ag1.confidence >= policy.agent1_threshold) {
        p.is_enzyme = false;
        return p;
      }
      p.is_enzyme = true;
      size_t keep;
      if (mode == OutputMode::Recommendation) {
        keep = kRecommendationSize;
        p.function_count = std::max(ev.ag2, 1);
      } else if (policy.use_count_hint) {
        p.function_count = std::max(ev.ag2, 1);
        keep = static_cast<size_t>(p.function_count);
      } else {
        p.function_count = 1;
        keep = 1;
      }
      p.ranked_ecs.assign(ev.ag3.begin(), ev.ag3.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(keep, ev.ag3.size())));
      return p;
    }
  }
  p.abstained = true;
  p.source = policy.precedence.front();
  return p;
}

double policy_score(const std::vector<QueryEvidence>& evidence,
                    const std::vector<ProteinRecord>& gold, const IntegrationPolicy& policy,
                    TuneObjective objective, const LabelDictionary* dictionary) {
  std::vector<Prediction> preds;
  preds.reserve(evidence.size());
  for (const auto& ev : evidence) preds.push_back(integrate(ev, policy, OutputMode::Prediction));
  return objective == TuneObjective::EcMicroF1 ? ec_micro_f1(preds, gold, dictionary)
                                               : enzyme_f1(preds, gold);
}

TuneResult greedy_tune(const std::vector<QueryEvidence>& evidence,
                       const std::vector<ProteinRecord>& gold, const TuneGrid& grid,
                       TuneObjective objective, const LabelDictionary* dictionary) {
  if (evidence.empty() || gold.empty()) throw InvalidArgument("validation set is empty");
  if (grid.identities.empty() || grid.agent1_thresholds.empty() || grid.precedences.empty()) {
    throw InvalidArgument("tuning grid is empty");
  }
  auto score = [&](const IntegrationPolicy& p) {
    return policy_score(evidence, gold, p, objective, dictionary);
  };

  TuneResult res;
  bool first = true;
  for (const auto& order : grid.precedences) {
    for (double identity : grid.identities) {
      for (double threshold : grid.agent1_thresholds) {
        IntegrationPolicy p;
        p.precedence = order;
        p.alignment_min_identity = identity;
        p.agent1_threshold = threshold;
        p.use_count_hint = grid.use_count_hint;
        p.validate();
        double s = score(p);
        res.scoreboard.push_back({p, s});
        if (first || s > res.best_score) {
          res.best = p;
          res.best_score = s;
          first = false;
        }
      }
    }
  }
  res.history.push_back(res.best_score);

  std::vector<double> hit_identities, confidences;
  for (const auto& ev : evidence) {
    if (ev.hit) hit_identities.push_back(ev.hit->identity);
    confidences.push_back(ev.ag1.confidence);
  }
  const auto identity_candidates = merge_candidates(
      grid.identities, spaced_subset(hit_identities, grid.max_data_candidates));
  const auto threshold_candidates = merge_candidates(
      grid.agent1_thresholds, spaced_subset(confidences, grid.max_data_candidates));

  bool improved = true;
  while (improved) {
    improved = false;
    auto try_field = [&](auto apply, const auto& candidates) {
      for (const auto& c : candidates) {
        IntegrationPolicy p = res.best;
        apply(p, c);
        if (p == res.best) continue;
        double s = score(p);
        if (s > res.best_score) {
          if (s < res.history.back()) throw Error("tuning objective decreased");
          res.best = p;
          res.best_score = s;
          res.history.push_back(s);
          improved = true;
        }
      }
    };
    try_field([](IntegrationPolicy& p, double v) { p.alignment_min_identity = v; },
              identity_candidates);
    try_field([](IntegrationPolicy& p, double v) { p.agent1_threshold = v; },
              threshold_candidates);
    try_field([](IntegrationPolicy& p, const std::vector<PredictionSource>& v) {
      p.precedence = v;
    }, grid.precedences);
  }
  return res;
}

}  // namespace ecrecer
