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

// Acceptance run: one PASS/FAIL line per headline criterion, exit 1 on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "ecrecer/agents.h"
#include "ecrecer/alignment.h"
#include "ecrecer/bundle.h"
#include "ecrecer/digest.h"
#include "ecrecer/error.h"
#include "ecrecer/fasta.h"
#include "ecrecer/flatfile.h"
#include "ecrecer/gbdt.h"
#include "ecrecer/hnsw.h"
#include "ecrecer/integrator.h"
#include "ecrecer/job_service.h"
#include "ecrecer/linear.h"
#include "ecrecer/metrics.h"
#include "ecrecer/prediction.h"
#include "ecrecer/preprocess.h"
#include "ecrecer/split.h"
#include "test_util.h"

namespace ecrecer {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::string kData = ECRECER_TEST_DATA;

// Collects failed conditions for one criterion.
struct Checker {
  std::vector<std::string> failures;
  std::ostringstream facts;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s << what << ": got " << got << " want " << want << " +/- " << tol;
      failures.push_back(s.str());
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool run_criterion(const std::string& name, double budget_s, const std::function<void(Checker&)>& body) {
  Checker c;
  auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  double secs = seconds_since(t0);
  if (secs >= budget_s) {
    std::ostringstream s;
    s << "runtime " << secs << " s exceeds " << budget_s << " s";
    c.failures.push_back(s.str());
  }
  bool ok = c.failures.empty();
  std::printf("%s %s (%.2f s)", ok ? "PASS" : "FAIL", name.c_str(), secs);
  std::string facts = c.facts.str();
  if (!facts.empty()) std::printf(" %s", facts.c_str());
  std::printf("\n");
  for (size_t i = 0; i < c.failures.size() && i < 10; ++i) std::printf("  - %s\n", c.failures[i].c_str());
  if (c.failures.size() > 10) std::printf("  - ... %zu more\n", c.failures.size() - 10);
  std::fflush(stdout);
  return ok;
}

RowList all_rows(const FeatureMatrix& m) {
  RowList out;
  for (size_t i = 0; i < m.rows(); ++i) out.push_back(m.row(i));
  return out;
}

// ------------------------------------------------------------------ metrics

void metric_regression(Checker& c) {
  struct Row {
    const char* name;
    ConfusionCounts counts;
    double acc, ppv, npv, recall, f1;
  };
  const Row rows[] = {
      {"ours", {3185, 159, 4295, 394, 0, 0}, 0.9312, 0.9525, 0.9160, 0.8899, 0.9201},
      {"knn", {2962, 192, 3605, 342, 0, 0}, 0.9248, 0.9391, 0.9134, 0.8965, 0.9173},
  };
  for (const auto& r : rows) {
    auto m = binary_metrics(r.counts);
    c.expect(m.acc && m.ppv && m.npv && m.recall && m.f1, std::string(r.name) + ": undefined metric");
    if (!(m.acc && m.ppv && m.npv && m.recall && m.f1)) continue;
    c.near(*m.acc, r.acc, 1e-4, std::string(r.name) + " acc");
    c.near(*m.ppv, r.ppv, 1e-4, std::string(r.name) + " ppv");
    c.near(*m.npv, r.npv, 1e-4, std::string(r.name) + " npv");
    c.near(*m.recall, r.recall, 1e-4, std::string(r.name) + " recall");
    c.near(*m.f1, r.f1, 1e-4, std::string(r.name) + " f1");
  }
}

void abstention(Checker& c) {
  auto gold = parse_flatfile(kData + "/external_gold.tsv").records;
  auto preds = load_external_predictions(kData + "/external_predictions.tsv");
  // Hand count over the enzyme rows of the fixture.
  uint64_t tp = 0, fn = 0, up = 0;
  for (const auto& g : gold) {
    if (!g.is_enzyme) continue;
    auto it = std::find_if(preds.begin(), preds.end(), [&](const Prediction& p) { return p.id == g.id; });
    if (it == preds.end()) continue;
    if (it->abstained) {
      ++up;
    } else if (it->is_enzyme) {
      ++tp;
    } else {
      ++fn;
    }
  }
  c.expect(tp == 3 && fn == 1 && up == 1, "hand counts differ from the planted 3/1/1");
  auto r = evaluate_task(preds, gold, Task::EnzymeOrNot);
  c.expect(r.binary.tp == tp && r.binary.fn == fn && r.binary.up == up, "evaluator counts differ from hand counts");
  c.expect(r.binary_metrics.recall.has_value(), "recall undefined");
  if (r.binary_metrics.recall) {
    c.expect(*r.binary_metrics.recall == static_cast<double>(tp) / static_cast<double>(tp + fn + up),
             "recall is not TP/(TP+FN+UP)");
    c.facts << "recall=" << *r.binary_metrics.recall;
  }
  auto ec = evaluate_task(preds, gold, Task::ECNumber);
  c.expect(ec.micro_recall.has_value() &&
               *ec.micro_recall == static_cast<double>(ec.micro.tp) /
                                       static_cast<double>(ec.micro.tp + ec.micro.fn + ec.micro.up),
           "EC micro recall ignores abstentions");
  c.expect(ec.micro.up == 1, "EC task abstention count");
}

// --------------------------------------------------------------------- hnsw

void hnsw_quality(Checker& c) {
  std::mt19937_64 rng(2024);
  auto data = testing::uniform_points(2000, 64, rng);
  HnswBuildOptions opts;
  opts.verify_each_insert = true;
  auto idx = AnnIndex::build(data, {16, 200, Metric::Euclidean}, 7, opts);
  idx.check_invariants();
  for (uint32_t node = 0; node < idx.size(); ++node) {
    if (idx.links(node, 0).size() > 32) c.expect(false, "layer 0 degree above 2m");
    for (int l = 1; l <= idx.level_of(node); ++l) {
      if (idx.links(node, l).size() > 16) c.expect(false, "upper layer degree above m");
    }
  }
  for (int layer = 0; layer <= idx.max_level(); ++layer) {
    size_t members = 0;
    for (uint32_t n = 0; n < idx.size(); ++n) members += idx.level_of(n) >= layer;
    c.expect(idx.reachable_on_layer(layer) == members, "layer " + std::to_string(layer) + " not connected");
  }
  auto queries = testing::uniform_points(200, 64, rng);
  size_t found = 0;
  for (size_t q = 0; q < queries.rows(); ++q) {
    auto truth = brute_force_knn(data, queries.row(q), 10);
    std::set<uint32_t> got;
    for (const auto& n : idx.search(queries.row(q), 10, 300)) got.insert(n.id);
    for (const auto& n : truth) found += got.count(n.id);
  }
  double recall = static_cast<double>(found) / static_cast<double>(10 * queries.rows());
  c.facts << "recall@10=" << recall;
  c.expect(recall >= 0.95, "recall@10 below 0.95");
}

// ------------------------------------------------------------------- linear

void l2svm_correctness(Checker& c) {
  {
    std::vector<float> p{1, 0}, n{-1, 0};
    L2SvmParams params;
    params.tol = 1e-10;
    auto m = train_l2svm({Row(p)}, {Row(n)}, params);
    c.near(m.weight(0), 0.8, 1e-8, "analytic w1");
    c.near(m.weight(1), 0.0, 1e-12, "analytic w2");
    c.near(m.bias, 0.0, 1e-8, "analytic bias");
  }
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto pts = testing::uniform_points(120, 6, rng);
    RowList pos, neg;
    for (size_t i = 0; i < pts.rows(); ++i) (i < 60 ? pos : neg).push_back(pts.row(i));
    L2SvmParams params;
    params.tol = 1e-6;
    params.seed = static_cast<uint64_t>(trial);
    auto m = train_l2svm(pos, neg, params);
    const auto& h = m.meta.objective_history;
    c.expect(!h.empty(), "no dual history");
    for (size_t i = 1; i < h.size(); ++i) {
      if (h[i] > h[i - 1] + 1e-9) c.expect(false, "dual objective rose at sweep " + std::to_string(i));
    }
  }
  {
    std::vector<int> labels;
    auto pts = testing::gaussian_points(testing::matrix_of({{-2, -2}, {2, 2}}), 100, 0.3, rng, &labels);
    RowList pos, neg;
    for (size_t i = 0; i < pts.rows(); ++i) (labels[i] ? pos : neg).push_back(pts.row(i));
    auto m = train_l2svm(pos, neg);
    size_t correct = 0;
    for (Row r : pos) correct += decision(m, r) > 0;
    for (Row r : neg) correct += decision(m, r) < 0;
    c.facts << "blob_acc=" << static_cast<double>(correct) / 200.0;
    c.expect(correct == 200, "separable blobs not fit");
  }
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = testing::uniform_points(15, 4, rng);
    RowList x = all_rows(pts);
    std::vector<int> y;
    for (size_t i = 0; i < x.size(); ++i) y.push_back(static_cast<int>(i % 2));
    std::vector<double> w(4);
    for (auto& v : w) v = u(rng);
    double b = u(rng), l2 = 0.5;
    auto g = logistic_gradient(x, y, l2, w, b);
    const double h = 1e-6;
    for (size_t j = 0; j <= w.size(); ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < w.size()) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      double num = (logistic_objective(x, y, l2, wp, bp) - logistic_objective(x, y, l2, wm, bm)) / (2 * h);
      worst = std::max(worst, std::abs(g[j] - num) / std::max(1.0, std::abs(num)));
    }
  }
  c.facts << " fd_rel_err=" << worst;
  c.expect(worst <= 1e-5, "logistic gradient disagrees with finite differences");
}

// --------------------------------------------------------------------- gbdt

std::vector<double> walk_probabilities(const GbdtModel& m, Row x) {
  std::vector<double> margin(static_cast<size_t>(m.classes), 0.0);
  for (int r = 0; r < m.rounds; ++r) {
    for (int k = 0; k < m.classes; ++k) {
      const auto& t = m.tree(r, k);
      size_t node = 0;
      while (t.nodes[node].feature >= 0) {
        const auto& nd = t.nodes[node];
        node = static_cast<size_t>(x[static_cast<size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right);
      }
      margin[static_cast<size_t>(k)] += t.nodes[node].value;
    }
  }
  double mx = *std::max_element(margin.begin(), margin.end()), z = 0.0;
  for (auto& v : margin) z += (v = std::exp(v - mx));
  for (auto& v : margin) v /= z;
  return margin;
}

void gbdt_correctness(Checker& c) {
  // Three concentric rings: separable, but no axis-aligned cut isolates a class.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), jitter(-0.15, 0.15);
  FeatureMatrix x(0, 2);
  std::vector<int> y;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 100; ++i) {
      double a = angle(rng), r = 1.0 + k + jitter(rng);
      x.append(std::vector<float>{static_cast<float>(r * std::cos(a)), static_cast<float>(r * std::sin(a))});
      y.push_back(k);
    }
  }
  GbdtParams p;
  p.subsample = 1.0;
  p.seed = 5;
  c.expect(p.max_depth == 6 && p.n_estimators == 120, "defaults differ from max_depth 6 / 120 rounds");
  auto m = train_gbdt(all_rows(x), y, 3, p);
  const auto& h = m.train_error_history;
  c.expect(h.size() == 120, "history length");
  for (size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) c.expect(false, "training error rose at round " + std::to_string(i));
  }
  c.expect(!h.empty() && h.back() == 0.0, "training error not zero after 120 rounds");
  size_t first_zero = h.size();
  for (size_t i = 0; i < h.size(); ++i) {
    if (h[i] == 0.0) {
      first_zero = i + 1;
      break;
    }
  }
  c.facts << "zero_error_round=" << first_zero;
  auto q = testing::uniform_points(1000, 2, rng, -4, 4);
  size_t mismatches = 0;
  for (size_t i = 0; i < q.rows(); ++i) {
    auto pr = predict_gbdt(m, q.row(i));
    auto ref = walk_probabilities(m, q.row(i));
    int arg = static_cast<int>(std::max_element(ref.begin(), ref.end()) - ref.begin());
    bool same = pr.label == arg;
    for (size_t k = 0; k < 3; ++k) same = same && std::abs(pr.probabilities[k] - ref[k]) <= 1e-12;
    mismatches += !same;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " of 1000 points disagree with the tree walk");
}

// -------------------------------------------------------------------- slice

LabelDictionary numbered_dictionary(size_t n) {
  std::vector<ECNumber> ecs;
  for (size_t i = 0; i < n; ++i) {
    ecs.push_back(parse_ec("1.1." + std::to_string(i / 100 + 1) + "." + std::to_string(i % 100 + 1)));
  }
  return LabelDictionary::from_ecs(ecs);
}

void slice_pipeline(Checker& c) {
  const size_t n_labels = 500, per_label = 10, dim = 32;
  std::mt19937_64 rng(500);
  auto centres = testing::uniform_points(n_labels, dim, rng, -1, 1);
  std::vector<int> y, ty;
  auto x = testing::gaussian_points(centres, per_label, 0.35, rng, &y);
  auto test = testing::gaussian_points(centres, 2, 0.35, rng, &ty);
  std::vector<std::vector<Label>> labels;
  for (int v : y) labels.push_back({static_cast<Label>(v)});

  Agent3Params p;
  p.negative_budget = 700;
  p.shortlist_size = 700;
  auto m = train_agent3(x, labels, numbered_dictionary(n_labels), p);

  // Full one-vs-all oracle: every other point is a negative.
  std::vector<LinearModel> full;
  size_t oracle_negatives = 0;
  for (Label l = 0; l < n_labels; ++l) {
    RowList pos, neg;
    for (size_t i = 0; i < x.rows(); ++i) (static_cast<Label>(y[i]) == l ? pos : neg).push_back(x.row(i));
    oracle_negatives += neg.size();
    full.push_back(train_l2svm(pos, neg, p.svm));
  }
  double ratio = static_cast<double>(m.stats.total_negatives) / static_cast<double>(oracle_negatives);

  size_t sliced = 0, oracle = 0, order_violations = 0, oversize = 0;
  for (size_t i = 0; i < test.rows(); ++i) {
    auto truth = static_cast<Label>(ty[i]);
    auto top = predict_agent3(m, test.row(i), OutputMode::Prediction, 1);
    sliced += !top.empty() && top[0].ec == m.dictionary.ec_of(truth);
    Label best = 0;
    double best_d = decision(full[0], test.row(i));
    for (Label l = 1; l < n_labels; ++l) {
      double d = decision(full[l], test.row(i));
      if (d > best_d) {
        best = l;
        best_d = d;
      }
    }
    oracle += best == truth;
    auto rec = predict_agent3(m, test.row(i), OutputMode::Recommendation);
    oversize += rec.size() > kRecommendationSize || rec.empty();
    for (size_t j = 1; j < rec.size(); ++j) {
      bool strict = rec[j - 1].score > rec[j].score ||
                    (rec[j - 1].score == rec[j].score && ec_text_less(rec[j - 1].ec, rec[j].ec));
      order_violations += !strict;
    }
  }
  double n = static_cast<double>(test.rows());
  double acc_slice = static_cast<double>(sliced) / n, acc_oracle = static_cast<double>(oracle) / n;
  c.facts << "neg_ratio=" << ratio << " top1=" << acc_slice << " oracle_top1=" << acc_oracle;
  c.expect(ratio <= 0.2, "sampled negatives exceed 20% of the oracle's");
  c.expect(acc_slice >= acc_oracle - 0.02, "top-1 more than 2 points below the oracle");
  c.expect(order_violations == 0, "ranking not strictly ordered");
  c.expect(oversize == 0, "recommendation list empty or longer than 20");
}

// --------------------------------------------------------------- integrator

Hit make_hit(const std::string& id, double identity, const std::vector<std::string>& ecs) {
  Hit h;
  h.id = id;
  h.identity = identity;
  h.aligned_len = 100;
  for (const auto& e : ecs) h.ecs.push_back(parse_ec(e));
  h.is_enzyme = !h.ecs.empty();
  return h;
}

struct TuneFixture {
  std::string name;
  std::vector<QueryEvidence> evidence;
  std::vector<ProteinRecord> gold;
};

// Each source is right with its own probability; hits carry the right labels
// only above a hidden identity cut.
TuneFixture mixed_fixture(uint64_t seed, double agent_right, double hit_rate, double cut) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution agents(agent_right), has_hit(hit_rate), conf_coin(0.5);
  std::uniform_real_distribution<double> ident(0.2, 1.0), conf(0.5, 1.0);
  TuneFixture f;
  f.name = "mixed-" + std::to_string(seed);
  for (int i = 0; i < 80; ++i) {
    std::string id = "R" + std::to_string(i);
    bool enzyme = i % 4 != 0;
    std::string ec = std::to_string(1 + i % 6) + ".1.1." + std::to_string(i % 9 + 1);
    f.gold.push_back(testing::make_record(id, "MKV", enzyme ? std::vector<std::string>{ec} : std::vector<std::string>{}));
    QueryEvidence ev;
    ev.id = id;
    bool right = agents(rng);
    ev.ag1 = {conf_coin(rng) ? enzyme : !enzyme, conf(rng)};
    ev.ag2 = 1;
    ev.ag3 = {{parse_ec(right ? ec : "6.6.6.6"), 0.8}, {parse_ec("6.5.5.5"), 0.1}};
    if (has_hit(rng)) {
      double s = ident(rng);
      bool good = s >= cut;
      ev.hit = make_hit("T" + std::to_string(i), s,
                        good ? (enzyme ? std::vector<std::string>{ec} : std::vector<std::string>{})
                             : std::vector<std::string>{"6.4.4.4"});
    }
    f.evidence.push_back(ev);
  }
  return f;
}

double best_single_source(const TuneFixture& f, const TuneGrid& grid, PredictionSource source) {
  double best = 0.0;
  for (double id : grid.identities) {
    for (double th : grid.agent1_thresholds) {
      IntegrationPolicy p;
      p.alignment_min_identity = id;
      p.agent1_threshold = th;
      p.precedence = {source};
      best = std::max(best, policy_score(f.evidence, f.gold, p, TuneObjective::EcMicroF1));
    }
  }
  return best;
}

void integration_guarantee(Checker& c) {
  std::vector<TuneFixture> fixtures;
  fixtures.push_back(mixed_fixture(1, 0.5, 0.6, 0.6));
  fixtures.push_back(mixed_fixture(2, 0.9, 0.3, 0.9));
  fixtures.push_back(mixed_fixture(3, 0.2, 0.9, 0.4));
  fixtures.push_back(mixed_fixture(4, 0.6, 1.0, 0.95));
  fixtures.push_back(mixed_fixture(5, 0.0, 0.5, 0.3));
  TuneGrid grid;
  bool has_align = false, has_agents = false;
  for (const auto& prec : grid.precedences) {
    has_align = has_align || prec == std::vector<PredictionSource>{PredictionSource::Alignment};
    has_agents = has_agents || prec == std::vector<PredictionSource>{PredictionSource::Agents};
  }
  c.expect(has_align && has_agents, "grid lacks a single-source baseline");
  for (const auto& f : fixtures) {
    auto r = greedy_tune(f.evidence, f.gold, grid);
    double a = best_single_source(f, grid, PredictionSource::Alignment);
    double g = best_single_source(f, grid, PredictionSource::Agents);
    if (r.best_score + 1e-12 < std::max(a, g)) {
      std::ostringstream s;
      s << f.name << ": tuned " << r.best_score << " < max(" << a << ", " << g << ")";
      c.expect(false, s.str());
    }
  }
  c.facts << "fixtures=" << fixtures.size();

  // Self-test: the training set against its own alignment catalog.
  auto corpus = testing::family_corpus(30, 6, 99);
  auto index = build_kmer_index(corpus, 5);
  IntegrationPolicy pol;
  pol.precedence = {PredictionSource::Alignment, PredictionSource::Agents};
  std::vector<Prediction> preds;
  for (const auto& r : corpus) {
    QueryEvidence ev;
    ev.id = r.id;
    ev.ag1 = {false, 1.0};
    ev.hit = align_query(index, r.seq);
    preds.push_back(integrate(ev, pol));
  }
  auto ec = evaluate_task(preds, corpus, Task::ECNumber);
  auto bin = evaluate_task(preds, corpus, Task::EnzymeOrNot);
  c.facts << " self_test_acc=" << ec.accuracy;
  c.expect(ec.accuracy == 1.0, "self-test EC accuracy below 1");
  c.expect(bin.accuracy == 1.0, "self-test enzyme accuracy below 1");
}

// ------------------------------------------------------------------ dataset

Snapshot load_snapshot(const std::string& file, const std::string& label) {
  auto parsed = parse_flatfile(kData + "/" + file);
  auto prep = preprocess(std::move(parsed.records));
  return {label, parse_date(label), std::move(prep.clean)};
}

bool leaks(const DatasetSplit& s) {
  std::set<std::string> train;
  for (const auto& r : s.train) train.insert(r.seq);
  for (const auto& r : s.test) {
    if (train.count(r.seq)) return true;
  }
  return false;
}

void dataset_pipeline(Checker& c) {
  auto parsed = parse_flatfile(kData + "/snapshot_early.tsv");
  auto prep = preprocess(parsed.records);
  const auto& r = prep.report;
  c.expect(r.raw == 10 && r.changed_seq == 1 && r.changed_seq_rows == 2 && r.dedup == 2 &&
               r.ec_collapsed == 1 && r.clean == 6 && r.enzymes == 4 && r.non_enzymes == 2 &&
               r.distinct_ecs == 4,
           "preprocess counts differ from the hand count");

  auto early = load_snapshot("snapshot_early.tsv", "2018-02-28");
  auto late = load_snapshot("snapshot_late.tsv", "2020-06-30");
  SplitReport rep;
  auto s = chronological_split(early, late, Task::EnzymeOrNot, &rep);
  std::vector<std::string> train, test;
  for (const auto& x : s.train) train.push_back(x.id);
  for (const auto& x : s.test) test.push_back(x.id);
  c.expect(train == std::vector<std::string>{"A1", "A3", "A4", "A7", "A9"}, "fixture train ids");
  c.expect(test == std::vector<std::string>{"B3", "B4", "B6", "B7"}, "fixture test ids");
  c.expect(rep.train_after_cutoff == 1 && rep.test_seen_sequence == 2 && rep.test_before_cutoff == 1,
           "split exclusion counts differ from the hand count");

  size_t splits = 0;
  auto check_split = [&](const DatasetSplit& sp, Task t) {
    ++splits;
    c.expect(!leaks(sp), "train and test share a sequence");
    assert_no_leakage(sp);
    if (t == Task::FunctionCount) {
      auto hist = function_count_histogram(sp.train);
      size_t sum = 0;
      for (size_t k = 1; k < hist.size(); ++k) sum += hist[k];
      size_t enzymes = 0;
      for (const auto& x : sp.train) enzymes += x.is_enzyme;
      c.expect(hist[0] == 0 && sum == enzymes && enzymes == sp.train.size(),
               "function-count partition does not sum to the enzyme total");
    }
  };
  for (Task t : {Task::EnzymeOrNot, Task::FunctionCount, Task::ECNumber}) check_split(chronological_split(early, late, t), t);

  std::mt19937_64 rng(11);
  std::vector<std::string> pool;
  for (int i = 0; i < 60; ++i) pool.push_back(testing::random_protein(rng, 15));
  std::uniform_int_distribution<int> pick(0, 59), year(2014, 2020), coin(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ProteinRecord> ra, rb;
    for (int i = 0; i < 80; ++i) {
      int k = coin(rng);
      std::vector<std::string> ecs;
      if (k >= 1) ecs.push_back("1.1.1." + std::to_string(1 + i % 3));
      if (k == 2) ecs.push_back("2.7.1." + std::to_string(1 + i % 2));
      auto rec = testing::make_record("R" + std::to_string(i), pool[static_cast<size_t>(pick(rng))], ecs,
                                      std::to_string(year(rng)) + "-06-01");
      (i % 2 ? ra : rb).push_back(rec);
    }
    Snapshot a{"a", parse_date("2017-12-31"), preprocess(ra).clean};
    Snapshot b{"b", parse_date("2020-12-31"), preprocess(rb).clean};
    for (Task t : {Task::EnzymeOrNot, Task::FunctionCount, Task::ECNumber}) check_split(chronological_split(a, b, t), t);
  }
  c.facts << "splits=" << splits;
}

// ---------------------------------------------------------------- alignment

int full_sw_score(std::string_view a, std::string_view b, const AlignmentScoring& s = {}) {
  const int neg = std::numeric_limits<int>::min() / 4;
  std::vector<int> h(b.size() + 1, 0), e(b.size() + 1, neg);
  int best = 0;
  for (size_t i = 1; i <= a.size(); ++i) {
    int f = neg;
    std::vector<int> nh(b.size() + 1, 0);
    for (size_t j = 1; j <= b.size(); ++j) {
      e[j] = std::max(e[j] - s.gap_extend, h[j] - s.gap_open - s.gap_extend);
      f = std::max(f - s.gap_extend, nh[j - 1] - s.gap_open - s.gap_extend);
      int m = h[j - 1] + (a[i - 1] == b[j - 1] ? s.match : s.mismatch);
      nh[j] = std::max({0, m, e[j], f});
      best = std::max(best, nh[j]);
    }
    h.swap(nh);
  }
  return best;
}

// Homolog of `seq`: substitutions plus up to three short indels.
std::string with_indels(const std::string& seq, std::mt19937_64& rng) {
  std::string out = testing::mutate(seq, seq.size() / 10, rng);
  std::uniform_int_distribution<int> count(0, 3), len(1, 3), kind(0, 1);
  int n = count(rng);
  for (int i = 0; i < n && out.size() > 10; ++i) {
    std::uniform_int_distribution<size_t> pos(1, out.size() - 5);
    size_t at = pos(rng);
    size_t l = static_cast<size_t>(len(rng));
    if (kind(rng)) {
      out.insert(at, testing::random_protein(rng, l));
    } else {
      out.erase(at, l);
    }
  }
  return out;
}

void alignment_checks(Checker& c) {
  auto corpus = testing::family_corpus(20, 5, 31);
  auto index = build_kmer_index(corpus, 5);
  size_t exact = 0;
  for (const auto& r : corpus) {
    auto hit = align_query(index, r.seq);
    if (!hit) {
      c.expect(false, r.id + ": no hit for an exact duplicate");
      continue;
    }
    auto t = transfer_labels(*hit);
    bool ok = hit->identity == 1.0 && hit->id == r.id && t.ecs == r.ecs && t.is_enzyme == r.is_enzyme &&
              t.function_count == r.function_count;
    c.expect(ok, r.id + ": duplicate did not return identity 1.0 with gold labels");
    exact += ok;
  }
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<size_t> len(20, 300);
  size_t equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto t = testing::random_protein(rng, len(rng));
    auto q = with_indels(t, rng);
    if (q.size() > 300) q.resize(300);
    long delta = static_cast<long>(q.size()) - static_cast<long>(t.size());
    long half = 2 * std::abs(delta) + 16;
    int banded = banded_smith_waterman(q, t, 0, half).score;
    int oracle = full_sw_score(q, t);
    if (banded == oracle) {
      ++equal;
    } else {
      c.expect(false, "pair " + std::to_string(trial) + ": banded " + std::to_string(banded) + " vs full " +
                          std::to_string(oracle));
    }
  }
  c.facts << "duplicates=" << exact << "/" << corpus.size() << " banded_equal=" << equal << "/100";
}

// --------------------------------------------------------------- end to end

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(ECRECER_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

bool pipeline(Checker& c, const fs::path& data, const fs::path& run) {
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"prepare", "prepare --input " + q(data / "early.tsv") + " --later " + q(data / "late.tsv") +
                      " --as-of 2016-10-31 --later-as-of 2017-12-31 --task enzyme --out " + q(run / "prep")},
      {"embed", "embed --one-hot --max-len 100 --input " + q(run / "prep" / "train.tsv") + " --out " +
                    q(run / "train.bin")},
      {"train", "train --train " + q(run / "prep" / "train.tsv") + " --embeddings " + q(run / "train.bin") +
                    " --out " + q(run / "bundle")},
      {"predict", "predict --bundle " + q(run / "bundle") + " --fasta " + q(run / "prep" / "test.fasta") +
                      " --out " + q(run / "pred.tsv")},
      {"evaluate", "evaluate --predictions " + q(run / "pred.tsv") + " --gold " + q(run / "prep" / "test.tsv") +
                       " --task enzyme --report " + q(run / "report.tsv")},
  };
  for (const auto& [name, args] : steps) {
    int code = run_cli(args).exit_code;
    if (code != 0) {
      c.expect(false, name + " exited " + std::to_string(code));
      return false;
    }
  }
  return true;
}

std::string fasta_of(const std::vector<FastaEntry>& entries, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end && i < entries.size(); ++i) out += ">" + entries[i].id + "\n" + entries[i].seq + "\n";
  return out;
}

void end_to_end(Checker& c) {
  testing::TempDir dir;
  auto corpus = testing::family_corpus(40, 10, 2024);
  std::vector<ProteinRecord> early;
  for (const auto& r : corpus) {
    if (r.date_integrated <= parse_date("2016-10-31")) early.push_back(r);
  }
  {
    std::ofstream a(dir / "early.tsv"), b(dir / "late.tsv");
    write_flatfile(a, early);
    write_flatfile(b, corpus);
  }
  auto t0 = Clock::now();
  if (!pipeline(c, dir.path(), dir / "run1")) return;
  double first = seconds_since(t0);
  c.facts << "pipeline=" << first << "s";
  c.expect(first < 60.0, "pipeline slower than 60 s");
  if (!pipeline(c, dir.path(), dir / "run2")) return;
  for (const fs::path rel : {fs::path("prep/run_manifest.json"), fs::path("train.bin.manifest.json"),
                             fs::path("bundle/manifest.json"), fs::path("pred.tsv"), fs::path("report.tsv")}) {
    c.expect(read_file(dir / "run1" / rel) == read_file(dir / "run2" / rel), rel.string() + " differs across reruns");
  }

  auto bundle = std::make_shared<const ModelBundle>(load_bundle(dir / "run1" / "bundle"));
  std::string fasta = read_file(dir / "run1" / "prep" / "test.fasta");
  std::string cli_bytes = read_file(dir / "run1" / "pred.tsv");
  auto entries = parse_fasta_text(fasta);
  c.facts << " queries=" << entries.size();
  std::string whole_id;
  std::vector<std::string> ids(16);
  {
    JobService svc(bundle, {dir / "store", 4, std::nullopt});
    whole_id = svc.submit(fasta, OutputMode::Prediction).id;
    std::vector<std::thread> clients;
    size_t chunk = (entries.size() + 15) / 16;
    for (size_t i = 0; i < 16; ++i) {
      clients.emplace_back([&, i] {
        ids[i] = svc.submit(fasta_of(entries, i * chunk, (i + 1) * chunk),
                            i % 2 ? OutputMode::Recommendation : OutputMode::Prediction).id;
      });
    }
    for (auto& t : clients) t.join();
    svc.wait_idle();
    auto res = svc.result(whole_id);
    c.expect(res.has_value() && *res == cli_bytes, "service result bytes differ from CLI bytes");
    std::set<std::string> unique(ids.begin(), ids.end());
    c.expect(unique.size() == 16, "concurrent submissions got colliding ids");
    for (size_t i = 0; i < 16; ++i) {
      auto j = svc.get(ids[i]);
      c.expect(j && j->state == JobState::Done, "concurrent job " + std::to_string(i) + " not Done");
    }
  }
  // Restart: finished results persist; a job left Running becomes Failed.
  std::string crashed;
  {
    JobStore store(dir / "store");
    auto job = store.create(fasta_of(entries, 0, 3), OutputMode::Prediction);
    store.transition(job, JobState::Running);
    crashed = job.id;
  }
  JobService again(bundle, {dir / "store", 2, std::nullopt});
  again.wait_idle();
  auto res = again.result(whole_id);
  c.expect(res.has_value() && *res == cli_bytes, "result lost across restart");
  size_t chunk = (entries.size() + 15) / 16;
  for (size_t i = 0; i < 16; ++i) {
    auto mode = i % 2 ? OutputMode::Recommendation : OutputMode::Prediction;
    auto want = predict_entries(*bundle, parse_fasta_text(fasta_of(entries, i * chunk, (i + 1) * chunk)), mode).tsv;
    auto got = again.result(ids[i]);
    c.expect(got.has_value() && *got == want, "concurrent job " + std::to_string(i) + " result wrong after restart");
  }
  auto j = again.get(crashed);
  c.expect(j && j->state == JobState::Failed, "interrupted Running job not marked Failed");
}

}  // namespace
}  // namespace ecrecer

int main() {
  using namespace ecrecer;
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<void(Checker&)> body;
  };
  const Criterion criteria[] = {
      {"metric-regression", 1.0, metric_regression},
      {"abstention-accounting", 60.0, abstention},
      {"hnsw-quality", 30.0, hnsw_quality},
      {"l2svm-correctness", 60.0, l2svm_correctness},
      {"gbdt-correctness", 60.0, gbdt_correctness},
      {"slice-pipeline", 300.0, slice_pipeline},
      {"integration-guarantee", 60.0, integration_guarantee},
      {"dataset-pipeline", 60.0, dataset_pipeline},
      {"alignment", 60.0, alignment_checks},
      {"end-to-end", 300.0, end_to_end},
  };
  size_t failed = 0;
  for (const auto& cr : criteria) failed += !run_criterion(cr.name, cr.budget_s, cr.body);
  std::printf("%zu/%zu criteria passed\n", std::size(criteria) - failed, std::size(criteria));
  return failed ? 1 : 0;
}
