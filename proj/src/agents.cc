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

#include "ecrecer/agents.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ecrecer/binary_io.h"
#include "ecrecer/error.h"

namespace ecrecer {
namespace {

constexpr uint32_t kVersion = 1;

FeatureMatrix gather(const std::vector<ProteinRecord>& records, const EmbeddingTable& table) {
  FeatureMatrix x(0, table.dim());
  for (const auto& r : records) x.append(table.at(r.id));
  return x;
}

void check_dim(size_t expected, Row x) {
  if (x.size() != expected) {
    throw InvalidArgument("query has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(expected));
  }
}

void put_hnsw_params(std::ostream& out, const HnswParams& p) {
  binio::put<uint64_t>(out, p.m);
  binio::put<uint64_t>(out, p.ef_construction);
  binio::put<uint32_t>(out, p.metric == Metric::Cosine ? 1 : 0);
}

HnswParams get_hnsw_params(std::istream& in) {
  HnswParams p;
  p.m = binio::get<uint64_t>(in);
  p.ef_construction = binio::get<uint64_t>(in);
  p.metric = binio::get<uint32_t>(in) == 1 ? Metric::Cosine : Metric::Euclidean;
  return p;
}

}  // namespace

// ----------------------------------------------------------------- Agent 1

Agent1Model train_agent1(FeatureMatrix x, std::vector<uint8_t> labels,
                         const Agent1Params& params) {
  if (params.n_neighbors < 1) throw InvalidArgument("n_neighbors must be at least 1");
  if (x.rows() == 0) throw InvalidArgument("agent 1 needs training data");
  if (x.rows() != labels.size()) throw InvalidArgument("feature and label counts differ");
  Agent1Model m;
  m.params = params;
  m.labels = std::move(labels);
  if (x.rows() >= params.exact_scan_limit) {
    HnswParams hp = params.ann;
    hp.metric = params.metric;
    m.ann = AnnIndex::build(std::move(x), hp, params.seed);
  } else {
    m.train = std::move(x);
  }
  return m;
}

Agent1Model train_agent1(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const Agent1Params& params) {
  std::vector<uint8_t> labels;
  labels.reserve(train.size());
  for (const auto& r : train) labels.push_back(r.is_enzyme ? 1 : 0);
  return train_agent1(gather(train, table), std::move(labels), params);
}

Agent1Output predict_agent1(const Agent1Model& m, Row x) {
  check_dim(m.dim(), x);
  const size_t k = static_cast<size_t>(m.params.n_neighbors);
  std::vector<Neighbor> nbrs;
  if (m.ann) {
    size_t ef = std::max(m.params.ef_search, 10 * k);
    nbrs = m.ann->search(x, k, ef);
  } else {
    nbrs = brute_force_knn(m.train, x, k, m.params.metric);
  }
  double votes[2] = {0.0, 0.0};
  bool exact = std::any_of(nbrs.begin(), nbrs.end(),
                           [](const Neighbor& n) { return n.distance == 0.0; });
  for (const auto& n : nbrs) {
    if (exact) {
      if (n.distance == 0.0) votes[m.labels[n.id]] += 1.0;
    } else {
      votes[m.labels[n.id]] += 1.0 / n.distance;
    }
  }
  Agent1Output out;
  double total = votes[0] + votes[1];
  out.is_enzyme = votes[1] > votes[0];
  out.confidence = total > 0 ? std::max(votes[0], votes[1]) / total : 0.0;
  return out;
}

// ----------------------------------------------------------------- Agent 2

Agent2Model train_agent2(const RowList& x, const std::vector<int>& counts,
                         const GbdtParams& params) {
  if (x.size() != counts.size()) throw InvalidArgument("feature and label counts differ");
  std::vector<int> sp_labels;
  sp_labels.reserve(counts.size());
  std::set<int> multi_counts;
  for (int c : counts) {
    if (c < 1 || c > kMaxFunctionCount) {
      throw InvalidArgument("function count " + std::to_string(c) + " outside 1..8");
    }
    sp_labels.push_back(c == 1 ? 0 : 1);
    if (c > 1) multi_counts.insert(c);
  }
  if (multi_counts.empty()) {
    throw InvalidArgument("no multifunctional rows: the count model cannot be trained");
  }
  Agent2Model m;
  m.sp = train_gbdt(x, sp_labels, 2, params);
  m.mp_counts.assign(multi_counts.begin(), multi_counts.end());
  if (m.mp_counts.size() > 1) {
    RowList mx;
    std::vector<int> my;
    for (size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] < 2) continue;
      mx.push_back(x[i]);
      my.push_back(static_cast<int>(
          std::lower_bound(m.mp_counts.begin(), m.mp_counts.end(), counts[i]) -
          m.mp_counts.begin()));
    }
    m.mp = train_gbdt(mx, my, static_cast<int>(m.mp_counts.size()), params);
  }
  return m;
}

Agent2Model train_agent2(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const GbdtParams& params) {
  RowList x;
  std::vector<int> counts;
  for (const auto& r : train) {
    if (!r.is_enzyme) throw InvalidArgument("agent 2 trains on enzymes only; " + r.id + " is not");
    x.push_back(table.at(r.id));
    counts.push_back(r.function_count);
  }
  return train_agent2(x, counts, params);
}

int predict_agent2(const Agent2Model& m, Row x) {
  check_dim(m.dim(), x);
  if (predict_gbdt(m.sp, x).label == 0) return 1;
  if (!m.mp) return m.mp_counts.front();
  return m.mp_counts[static_cast<size_t>(predict_gbdt(*m.mp, x).label)];
}

// ----------------------------------------------------------------- Agent 3

Agent3Model train_agent3(FeatureMatrix x, std::vector<std::vector<Label>> labels,
                         LabelDictionary dictionary, const Agent3Params& params) {
  if (x.rows() == 0) throw InvalidArgument("agent 3 needs training data");
  if (x.rows() != labels.size()) throw InvalidArgument("feature and label counts differ");
  const size_t n_labels = dictionary.size();
  std::vector<std::vector<uint32_t>> positives(n_labels);
  for (size_t i = 0; i < labels.size(); ++i) {
    auto& ls = labels[i];
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    for (Label l : ls) {
      if (l >= n_labels) throw InvalidArgument("label outside the dictionary");
      positives[l].push_back(static_cast<uint32_t>(i));
    }
  }

  Agent3Model m;
  m.params = params;
  m.dictionary = std::move(dictionary);
  m.point_labels = std::move(labels);
  m.ann = AnnIndex::build(std::move(x), params.ann, params.seed);
  m.classifiers.resize(n_labels);
  std::vector<size_t> neg_sizes(n_labels, 0);

  const auto& data = m.ann.data();
  const size_t n_points = data.rows();
  auto has_label = [&](uint32_t point, Label l) {
    const auto& ls = m.point_labels[point];
    return std::binary_search(ls.begin(), ls.end(), l);
  };

  auto train_label = [&](Label l) {
    const auto& pos = positives[l];
    if (pos.empty()) {
      // Unreachable for dictionaries built from the training records.
      LinearModel constant;
      constant.dim = data.cols();
      constant.bias = -1.0;
      m.classifiers[l] = constant;
      return;
    }
    const size_t budget = std::max<size_t>(params.negative_budget, 1);
    const size_t per_positive = (budget + pos.size() - 1) / pos.size();
    // Each positive contributes its per_positive nearest points that do not
    // carry the label. Other positives crowd the front of the neighbour list,
    // so the search widens until enough negatives turn up.
    std::vector<uint32_t> negatives;
    std::set<uint32_t> seen;
    for (uint32_t p : pos) {
      size_t width = std::min(per_positive + std::min<size_t>(pos.size(), 16), n_points);
      while (true) {
        auto nbrs = m.ann.search(data.row(p), width, std::max(params.ef_search, width));
        size_t found = 0;
        for (const auto& nb : nbrs) {
          if (!has_label(nb.id, l)) ++found;
        }
        if (found >= per_positive || width >= n_points) {
          size_t taken = 0;
          for (const auto& nb : nbrs) {
            if (taken == per_positive) break;
            if (has_label(nb.id, l)) continue;
            ++taken;
            if (seen.insert(nb.id).second) negatives.push_back(nb.id);
          }
          break;
        }
        width = std::min(width * 2, n_points);
      }
    }
    for (uint32_t nb : negatives) {
      if (has_label(nb, l)) throw Error("negative sampling returned a positive point");
    }
    neg_sizes[l] = negatives.size();
    if (negatives.empty()) {
      LinearModel constant;
      constant.dim = data.cols();
      constant.bias = 1.0;
      m.classifiers[l] = constant;
      return;
    }
    RowList prow, nrow;
    for (uint32_t p : pos) prow.push_back(data.row(p));
    for (uint32_t q : negatives) nrow.push_back(data.row(q));
    L2SvmParams svm = params.svm;
    svm.seed = params.svm.seed + l;
    m.classifiers[l] = sparsify(train_l2svm(prow, nrow, svm), params.sparsify_threshold);
    m.classifiers[l].meta.objective_history.clear();
  };

  const int threads = std::max(1, params.threads);
  if (threads == 1 || n_labels < 2) {
    for (Label l = 0; l < n_labels; ++l) train_label(l);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (Label l = static_cast<Label>(t); l < n_labels; l += static_cast<Label>(threads)) {
            train_label(l);
          }
        } catch (...) {
          errors[static_cast<size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (size_t s : neg_sizes) {
    m.stats.total_negatives += s;
    m.stats.max_negatives = std::max(m.stats.max_negatives, s);
    if (s == 0) ++m.stats.labels_without_negatives;
  }
  return m;
}

Agent3Model train_agent3(const std::vector<ProteinRecord>& train, const EmbeddingTable& table,
                         const Agent3Params& params) {
  for (const auto& r : train) {
    if (!r.is_enzyme) throw InvalidArgument("agent 3 trains on enzymes only; " + r.id + " is not");
  }
  LabelDictionary dict = build_label_dictionary(train);
  std::vector<std::vector<Label>> labels;
  labels.reserve(train.size());
  for (const auto& r : train) {
    std::vector<Label> ls;
    for (const auto& ec : r.ecs) ls.push_back(dict.label_of(ec));
    labels.push_back(std::move(ls));
  }
  return train_agent3(gather(train, table), std::move(labels), std::move(dict), params);
}

std::vector<ScoredEc> predict_agent3(const Agent3Model& m, Row x, OutputMode mode,
                                     size_t count_hint) {
  check_dim(m.dim(), x);
  const size_t shortlist = std::max<size_t>(m.params.shortlist_size, 1);
  auto nbrs = m.ann.search(x, shortlist, std::max(m.params.ef_search, shortlist));
  std::set<Label> candidates;
  for (const auto& nb : nbrs) {
    for (Label l : m.point_labels[nb.id]) candidates.insert(l);
  }
  struct Scored {
    double score;
    std::string text;
    Label label;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (Label l : candidates) {
    scored.push_back({probability(m.classifiers[l], x), format_ec(m.dictionary.ec_of(l)), l});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.text < b.text;
  });
  size_t keep = mode == OutputMode::Recommendation ? kRecommendationSize
                                                   : std::max<size_t>(count_hint, 1);
  if (scored.size() > keep) scored.resize(keep);
  std::vector<ScoredEc> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({m.dictionary.ec_of(s.label), s.score});
  return out;
}

// ----------------------------------------------------------- serialization

void save_agent1(std::ostream& out, const Agent1Model& m) {
  binio::put_header(out, "ECAGENT1", kVersion);
  binio::put<int32_t>(out, m.params.n_neighbors);
  binio::put<uint32_t>(out, m.params.metric == Metric::Cosine ? 1 : 0);
  binio::put<uint64_t>(out, m.params.exact_scan_limit);
  put_hnsw_params(out, m.params.ann);
  binio::put<uint64_t>(out, m.params.ef_search);
  binio::put<uint64_t>(out, m.params.seed);
  binio::put_vector(out, m.labels);
  binio::put<uint8_t>(out, m.ann ? 1 : 0);
  if (m.ann) {
    m.ann->save(out);
  } else {
    binio::put<uint64_t>(out, m.train.rows());
    binio::put<uint64_t>(out, m.train.cols());
    binio::put_vector(out, m.train.data());
  }
}

Agent1Model load_agent1(std::istream& in) {
  binio::expect_header(in, "ECAGENT1", kVersion);
  Agent1Model m;
  m.params.n_neighbors = binio::get<int32_t>(in);
  m.params.metric = binio::get<uint32_t>(in) == 1 ? Metric::Cosine : Metric::Euclidean;
  m.params.exact_scan_limit = binio::get<uint64_t>(in);
  m.params.ann = get_hnsw_params(in);
  m.params.ef_search = binio::get<uint64_t>(in);
  m.params.seed = binio::get<uint64_t>(in);
  m.labels = binio::get_vector<uint8_t>(in);
  if (binio::get<uint8_t>(in)) {
    m.ann = AnnIndex::load(in);
  } else {
    auto rows = binio::get<uint64_t>(in);
    auto cols = binio::get<uint64_t>(in);
    auto data = binio::get_vector<float>(in);
    if (data.size() != rows * cols) throw SerializationError("agent 1 matrix size mismatch");
    m.train = FeatureMatrix(rows, cols);
    m.train.data() = std::move(data);
  }
  if (m.labels.size() != m.size() || m.params.n_neighbors < 1 ||
      (m.ann ? m.ann->size() : m.train.rows()) != m.labels.size()) {
    throw SerializationError("agent 1 container is inconsistent");
  }
  for (uint8_t l : m.labels) {
    if (l > 1) throw SerializationError("agent 1 label out of range");
  }
  return m;
}

void save_agent2(std::ostream& out, const Agent2Model& m) {
  binio::put_header(out, "ECAGENT2", kVersion);
  save_gbdt(out, m.sp);
  std::vector<int32_t> counts(m.mp_counts.begin(), m.mp_counts.end());
  binio::put_vector(out, counts);
  binio::put<uint8_t>(out, m.mp ? 1 : 0);
  if (m.mp) save_gbdt(out, *m.mp);
}

Agent2Model load_agent2(std::istream& in) {
  binio::expect_header(in, "ECAGENT2", kVersion);
  Agent2Model m;
  m.sp = load_gbdt(in);
  auto counts = binio::get_vector<int32_t>(in, 16);
  m.mp_counts.assign(counts.begin(), counts.end());
  if (binio::get<uint8_t>(in)) m.mp = load_gbdt(in);
  if (m.mp_counts.empty() || (m.mp && static_cast<size_t>(m.mp->classes) != m.mp_counts.size()) ||
      (!m.mp && m.mp_counts.size() != 1)) {
    throw SerializationError("agent 2 container is inconsistent");
  }
  return m;
}

void save_agent3(std::ostream& out, const Agent3Model& m) {
  binio::put_header(out, "ECAGENT3", kVersion);
  const auto& p = m.params;
  put_hnsw_params(out, p.ann);
  binio::put<uint64_t>(out, p.ef_search);
  binio::put<uint64_t>(out, p.negative_budget);
  binio::put<uint64_t>(out, p.shortlist_size);
  binio::put<double>(out, p.svm.c);
  binio::put<int32_t>(out, p.svm.max_iter);
  binio::put<double>(out, p.svm.tol);
  binio::put<uint64_t>(out, p.svm.seed);
  binio::put<double>(out, p.sparsify_threshold);
  binio::put<uint64_t>(out, p.seed);
  std::ostringstream dict;
  m.dictionary.write_tsv(dict);
  binio::put_string(out, dict.str());
  binio::put<uint64_t>(out, m.point_labels.size());
  for (const auto& ls : m.point_labels) binio::put_vector(out, ls);
  m.ann.save(out);
  binio::put<uint64_t>(out, m.classifiers.size());
  for (const auto& c : m.classifiers) save_linear_model(out, c);
  binio::put<uint64_t>(out, m.stats.total_negatives);
  binio::put<uint64_t>(out, m.stats.max_negatives);
  binio::put<uint64_t>(out, m.stats.labels_without_negatives);
}

Agent3Model load_agent3(std::istream& in) {
  binio::expect_header(in, "ECAGENT3", kVersion);
  Agent3Model m;
  auto& p = m.params;
  p.ann = get_hnsw_params(in);
  p.ef_search = binio::get<uint64_t>(in);
  p.negative_budget = binio::get<uint64_t>(in);
  p.shortlist_size = binio::get<uint64_t>(in);
  p.svm.c = binio::get<double>(in);
  p.svm.max_iter = binio::get<int32_t>(in);
  p.svm.tol = binio::get<double>(in);
  p.svm.seed = binio::get<uint64_t>(in);
  p.sparsify_threshold = binio::get<double>(in);
  p.seed = binio::get<uint64_t>(in);
  std::istringstream dict(binio::get_string(in));
  m.dictionary = LabelDictionary::read_tsv(dict);
  auto n_points = binio::get<uint64_t>(in);
  m.point_labels.resize(n_points);
  for (auto& ls : m.point_labels) ls = binio::get_vector<Label>(in, 64);
  m.ann = AnnIndex::load(in);
  auto n_cls = binio::get<uint64_t>(in);
  if (n_cls != m.dictionary.size() || n_points != m.ann.size()) {
    throw SerializationError("agent 3 container is inconsistent");
  }
  m.classifiers.reserve(n_cls);
  for (uint64_t i = 0; i < n_cls; ++i) {
    m.classifiers.push_back(load_linear_model(in));
    if (m.classifiers.back().dim != m.ann.dim()) {
      throw SerializationError("agent 3 classifier dimension mismatch");
    }
  }
  for (const auto& ls : m.point_labels) {
    for (Label l : ls) {
      if (l >= n_cls) throw SerializationError("agent 3 point label out of range");
    }
  }
  m.stats.total_negatives = binio::get<uint64_t>(in);
  m.stats.max_negatives = binio::get<uint64_t>(in);
  m.stats.labels_without_negatives = binio::get<uint64_t>(in);
  return m;
}

}  // namespace ecrecer
