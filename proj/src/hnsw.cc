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

#include "ecrecer/hnsw.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <random>

#include "ecrecer/binary_io.h"
#include "ecrecer/error.h"

namespace ecrecer {
namespace {

constexpr std::string_view kMagic = "ECHNSW01";
constexpr uint32_t kVersion = 1;

double squared_l2(Row a, Row b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

double dot(Row a, Row b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double cosine_distance(Row a, Row b, double na, double nb) {
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot(a, b) / (na * nb);
}

// Per-thread visited marks reused across searches.
class VisitedList {
 public:
  void reset(size_t n) {
    if (tags_.size() < n) tags_.assign(n, 0);
    if (++gen_ == 0) {
      std::fill(tags_.begin(), tags_.end(), 0);
      gen_ = 1;
    }
  }
  bool visit(uint32_t id) {
    if (tags_[id] == gen_) return false;
    tags_[id] = gen_;
    return true;
  }

 private:
  std::vector<uint32_t> tags_;
  uint32_t gen_ = 0;
};

thread_local VisitedList tls_visited;

}  // namespace

std::string_view to_string(Metric m) {
  return m == Metric::Cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view s) {
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "cosine") return Metric::Cosine;
  throw ParseError("unknown metric '" + std::string(s) + "'");
}

double distance(Row a, Row b, Metric metric) {
  if (a.size() != b.size()) throw InvalidArgument("distance: dimension mismatch");
  if (metric == Metric::Euclidean) return std::sqrt(squared_l2(a, b));
  return cosine_distance(a, b, std::sqrt(dot(a, a)), std::sqrt(dot(b, b)));
}

std::vector<Neighbor> brute_force_knn(const FeatureMatrix& data, Row query, size_t k,
                                      Metric metric) {
  std::vector<Neighbor> all;
  all.reserve(data.rows());
  for (size_t i = 0; i < data.rows(); ++i) {
    all.push_back({static_cast<uint32_t>(i), distance(data.row(i), query, metric)});
  }
  k = std::min(k, all.size());
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(k), all.end(), less);
  all.resize(k);
  return all;
}

double AnnIndex::dist(Row a, uint32_t node) const {
  Row b = data_.row(node);
  if (params_.metric == Metric::Euclidean) return squared_l2(a, b);
  return cosine_distance(a, b, std::sqrt(dot(a, a)), norms_[node]);
}

double AnnIndex::dist(uint32_t a, uint32_t b) const {
  if (params_.metric == Metric::Euclidean) return squared_l2(data_.row(a), data_.row(b));
  return cosine_distance(data_.row(a), data_.row(b), norms_[a], norms_[b]);
}

AnnIndex AnnIndex::build(FeatureMatrix data, const HnswParams& params, uint64_t seed,
                         const HnswBuildOptions& options) {
  if (data.cols() == 0) throw InvalidArgument("cannot index vectors of dimension 0");
  if (data.rows() == 0) throw InvalidArgument("cannot index an empty table");
  if (params.m < 2) throw InvalidArgument("HNSW m must be at least 2");
  if (data.rows() > UINT32_MAX) throw InvalidArgument("too many points for the index");

  AnnIndex index;
  index.params_ = params;
  index.params_.ef_construction = std::max<size_t>(params.ef_construction, 1);
  index.data_ = std::move(data);
  const size_t n = index.data_.rows();
  if (params.metric == Metric::Cosine) {
    index.norms_.resize(n);
    for (size_t i = 0; i < n; ++i) {
      index.norms_[i] = std::sqrt(dot(index.data_.row(i), index.data_.row(i)));
    }
  }
  index.levels_.resize(n);
  index.links_.resize(n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double level_mult = 1.0 / std::log(static_cast<double>(params.m));
  for (size_t i = 0; i < n; ++i) {
    double u = 1.0 - unif(rng);  // (0, 1]
    int level = static_cast<int>(std::floor(-std::log(u) * level_mult));
    index.insert(static_cast<uint32_t>(i), level);
    if (options.verify_each_insert) index.check_invariants();
  }
  return index;
}

void AnnIndex::insert(uint32_t node, int level) {
  levels_[node] = level;
  links_[node].assign(static_cast<size_t>(level) + 1, {});
  if (max_level_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }
  Row q = data_.row(node);
  uint32_t ep = entry_point_;
  double ep_dist = dist(q, ep);
  for (int layer = max_level_; layer > level; --layer) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (uint32_t nb : links_[ep][static_cast<size_t>(layer)]) {
        double d = dist(q, nb);
        if (d < ep_dist || (d == ep_dist && nb < ep)) {
          ep_dist = d;
          ep = nb;
          changed = true;
        }
      }
    }
  }

  std::vector<Candidate> entry{{ep_dist, ep}};
  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    auto found = search_layer(q, entry, params_.ef_construction, layer);
    auto selected = select_neighbors(found, params_.m);
    links_[node][static_cast<size_t>(layer)] = selected;
    const size_t cap = max_degree(layer);
    for (uint32_t nb : selected) {
      auto& nb_links = links_[nb][static_cast<size_t>(layer)];
      nb_links.push_back(node);
      if (nb_links.size() > cap) {
        std::vector<Candidate> cands;
        cands.reserve(nb_links.size());
        for (uint32_t x : nb_links) cands.push_back({dist(nb, x), x});
        nb_links = select_neighbors(std::move(cands), cap);
      }
    }
    entry = std::move(found);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

std::vector<AnnIndex::Candidate> AnnIndex::search_layer(Row query,
                                                        const std::vector<Candidate>& entry,
                                                        size_t ef, int layer) const {
  auto closer = [](const Candidate& a, const Candidate& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
  };
  auto further = [&](const Candidate& a, const Candidate& b) { return closer(b, a); };
  // Min-heap of candidates to expand, max-heap of the current best `ef`.
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(further)> frontier(further);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(closer)> best(closer);

  VisitedList& visited = tls_visited;
  visited.reset(data_.rows());
  for (const auto& c : entry) {
    if (!visited.visit(c.id)) continue;
    frontier.push(c);
    best.push(c);
    if (best.size() > ef) best.pop();
  }
  while (!frontier.empty()) {
    Candidate cur = frontier.top();
    if (best.size() >= ef && closer(best.top(), cur)) break;
    frontier.pop();
    for (uint32_t nb : links_[cur.id][static_cast<size_t>(layer)]) {
      if (!visited.visit(nb)) continue;
      Candidate c{dist(query, nb), nb};
      if (best.size() < ef || closer(c, best.top())) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Keeps a candidate only if it is closer to the base point than to every
// neighbor already kept.
std::vector<uint32_t> AnnIndex::select_neighbors(std::vector<Candidate> candidates,
                                                 size_t m) const {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
  });
  std::vector<uint32_t> kept;
  kept.reserve(m);
  for (const auto& c : candidates) {
    if (kept.size() >= m) break;
    bool good = true;
    for (uint32_t k : kept) {
      if (dist(c.id, k) < c.dist) {
        good = false;
        break;
      }
    }
    if (good) kept.push_back(c.id);
  }
  return kept;
}

std::vector<Neighbor> AnnIndex::search(Row query, size_t k, size_t ef_search) const {
  if (query.size() != dim()) throw InvalidArgument("query dimension does not match index");
  if (k == 0 || size() == 0) return {};
  size_t ef = std::max(ef_search, k);

  uint32_t ep = entry_point_;
  double ep_dist = dist(query, ep);
  for (int layer = max_level_; layer > 0; --layer) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (uint32_t nb : links_[ep][static_cast<size_t>(layer)]) {
        double d = dist(query, nb);
        if (d < ep_dist || (d == ep_dist && nb < ep)) {
          ep_dist = d;
          ep = nb;
          changed = true;
        }
      }
    }
  }
  auto found = search_layer(query, {{ep_dist, ep}}, ef, 0);
  std::vector<Neighbor> out;
  out.reserve(found.size());
  for (const auto& c : found) {
    out.push_back({c.id, distance(data_.row(c.id), query, params_.metric)});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  if (out.size() > k) out.resize(k);
  return out;
}

void AnnIndex::check_invariants() const {
  const size_t n = levels_.size();
  for (size_t v = 0; v < n; ++v) {
    if (links_[v].empty()) continue;  // not inserted yet
    if (links_[v].size() != static_cast<size_t>(levels_[v]) + 1) {
      throw Error("node " + std::to_string(v) + " has a link table for the wrong level count");
    }
    for (int layer = 0; layer <= levels_[v]; ++layer) {
      const auto& ls = links_[v][static_cast<size_t>(layer)];
      if (ls.size() > max_degree(layer)) {
        throw Error("node " + std::to_string(v) + " exceeds the degree bound on layer " +
                    std::to_string(layer));
      }
      for (uint32_t nb : ls) {
        if (nb >= n || nb == v) {
          throw Error("node " + std::to_string(v) + " has an invalid link");
        }
        if (levels_[nb] < layer) {
          throw Error("edge " + std::to_string(v) + "->" + std::to_string(nb) +
                      " on layer " + std::to_string(layer) + " above the target's level");
        }
      }
    }
  }
  if (max_level_ >= 0 && levels_[entry_point_] != max_level_) {
    throw Error("entry point is not on the top layer");
  }
}

size_t AnnIndex::reachable_on_layer(int layer) const {
  if (max_level_ < layer) return 0;
  std::vector<bool> seen(size(), false);
  std::vector<uint32_t> stack{entry_point_};
  seen[entry_point_] = true;
  size_t count = 0;
  while (!stack.empty()) {
    uint32_t v = stack.back();
    stack.pop_back();
    ++count;
    for (uint32_t nb : links_[v][static_cast<size_t>(layer)]) {
      if (!seen[nb]) {
        seen[nb] = true;
        stack.push_back(nb);
      }
    }
  }
  return count;
}

void AnnIndex::save(std::ostream& out) const {
  binio::put_header(out, kMagic, kVersion);
  binio::put<uint64_t>(out, params_.m);
  binio::put<uint64_t>(out, params_.ef_construction);
  binio::put<uint32_t>(out, params_.metric == Metric::Cosine ? 1 : 0);
  binio::put<uint64_t>(out, data_.rows());
  binio::put<uint64_t>(out, data_.cols());
  binio::put<uint32_t>(out, entry_point_);
  binio::put<int32_t>(out, max_level_);
  binio::put_vector(out, data_.data());
  for (size_t v = 0; v < levels_.size(); ++v) {
    binio::put<int32_t>(out, levels_[v]);
    for (const auto& ls : links_[v]) binio::put_vector(out, ls);
  }
}

AnnIndex AnnIndex::load(std::istream& in) {
  binio::expect_header(in, kMagic, kVersion);
  AnnIndex index;
  index.params_.m = binio::get<uint64_t>(in);
  index.params_.ef_construction = binio::get<uint64_t>(in);
  index.params_.metric = binio::get<uint32_t>(in) == 1 ? Metric::Cosine : Metric::Euclidean;
  auto rows = binio::get<uint64_t>(in);
  auto cols = binio::get<uint64_t>(in);
  index.entry_point_ = binio::get<uint32_t>(in);
  index.max_level_ = binio::get<int32_t>(in);
  if (index.params_.m < 2) throw SerializationError("index m below 2");
  if (rows == 0 || cols == 0 || rows > UINT32_MAX) {
    throw SerializationError("index shape out of range");
  }
  auto data = binio::get_vector<float>(in);
  if (data.size() != rows * cols) throw SerializationError("index vector block size mismatch");
  index.data_ = FeatureMatrix(rows, cols);
  index.data_.data() = std::move(data);
  index.levels_.resize(rows);
  index.links_.resize(rows);
  for (size_t v = 0; v < rows; ++v) {
    int level = binio::get<int32_t>(in);
    if (level < 0 || level > 64) throw SerializationError("node level out of range");
    index.levels_[v] = level;
    index.links_[v].resize(static_cast<size_t>(level) + 1);
    for (auto& ls : index.links_[v]) ls = binio::get_vector<uint32_t>(in, 1u << 20);
  }
  if (index.entry_point_ >= rows) throw SerializationError("entry point out of range");
  if (index.params_.metric == Metric::Cosine) {
    index.norms_.resize(rows);
    for (size_t i = 0; i < rows; ++i) {
      index.norms_[i] = std::sqrt(dot(index.data_.row(i), index.data_.row(i)));
    }
  }
  try {
    index.check_invariants();
  } catch (const Error& e) {
    throw SerializationError(std::string("invalid index: ") + e.what());
  }
  return index;
}

}  // namespace ecrecer
