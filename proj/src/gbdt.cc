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

#include "ecrecer/gbdt.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "ecrecer/binary_io.h"
#include "ecrecer/error.h"

namespace ecrecer {
namespace {

constexpr std::string_view kMagic = "ECGBDT01";
constexpr uint32_t kVersion = 1;

void softmax_inplace(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[static_cast<size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

// Grows one tree over the rows whose node_of entry is 0 on entry.
class TreeBuilder {
 public:
  TreeBuilder(const RowList& x, const std::vector<std::vector<uint32_t>>& sorted,
              const GbdtParams& params)
      : x_(x), sorted_(sorted), params_(params) {}

  RegressionTree build(const std::vector<double>& grad, const std::vector<double>& hess,
                       const std::vector<uint8_t>& in_sample) {
    const size_t n = x_.size();
    node_of_.assign(n, -1);
    RegressionTree tree;
    TreeNode root;
    double g = 0.0, h = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (!in_sample[i]) continue;
      node_of_[i] = 0;
      g += grad[i];
      h += hess[i];
    }
    root.hessian_sum = h;
    tree.nodes.push_back(root);
    grad_sum_.assign(1, g);
    finalize_leaf(tree, 0);

    std::vector<int> frontier{0};
    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      frontier = split_level(tree, frontier, grad, hess);
    }
    return tree;
  }

 private:
  struct Best {
    double gain = 0.0;
    int feature = -1;
    float threshold = 0.0f;
    double gl = 0.0, hl = 0.0;
  };

  double score(double g, double h) const { return g * g / (h + params_.lambda); }

  void finalize_leaf(RegressionTree& tree, int node) {
    auto& nd = tree.nodes[static_cast<size_t>(node)];
    nd.value = -params_.learning_rate * grad_sum_[static_cast<size_t>(node)] /
               (nd.hessian_sum + params_.lambda);
  }

  std::vector<int> split_level(RegressionTree& tree, const std::vector<int>& frontier,
                               const std::vector<double>& grad,
                               const std::vector<double>& hess) {
    const size_t n_nodes = tree.nodes.size();
    std::vector<int> slot(n_nodes, -1);
    for (size_t s = 0; s < frontier.size(); ++s) slot[static_cast<size_t>(frontier[s])] = static_cast<int>(s);
    std::vector<Best> best(frontier.size());
    std::vector<double> gl(frontier.size()), hl(frontier.size());
    std::vector<float> last(frontier.size());
    std::vector<uint8_t> has_last(frontier.size());

    for (size_t f = 0; f < sorted_.size(); ++f) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(has_last.begin(), has_last.end(), 0);
      for (uint32_t i : sorted_[f]) {
        int node = node_of_[i];
        if (node < 0) continue;
        int s = slot[static_cast<size_t>(node)];
        if (s < 0) continue;
        const float v = x_[i][f];
        if (has_last[s] && v > last[s]) {
          const auto& nd = tree.nodes[static_cast<size_t>(node)];
          const double g = grad_sum_[static_cast<size_t>(node)];
          const double h = nd.hessian_sum;
          const double gr = g - gl[s], hr = h - hl[s];
          if (hl[s] >= params_.min_child_weight && hr >= params_.min_child_weight) {
            double gain = 0.5 * (score(gl[s], hl[s]) + score(gr, hr) - score(g, h));
            if (gain > best[s].gain) {
              float thr = last[s] + (v - last[s]) / 2.0f;
              if (!(thr > last[s])) thr = v;
              best[s] = {gain, static_cast<int>(f), thr, gl[s], hl[s]};
            }
          }
        }
        gl[s] += grad[i];
        hl[s] += hess[i];
        last[s] = v;
        has_last[s] = 1;
      }
    }

    std::vector<int> next;
    std::vector<int> left_of(n_nodes, -1);
    for (size_t s = 0; s < frontier.size(); ++s) {
      if (best[s].feature < 0 || !(best[s].gain > 0.0)) continue;
      const int node = frontier[s];
      const double g = grad_sum_[static_cast<size_t>(node)];
      const double h = tree.nodes[static_cast<size_t>(node)].hessian_sum;
      TreeNode left, right;
      left.hessian_sum = best[s].hl;
      right.hessian_sum = h - best[s].hl;
      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(left);
      tree.nodes.push_back(right);
      grad_sum_.push_back(best[s].gl);
      grad_sum_.push_back(g - best[s].gl);
      auto& nd = tree.nodes[static_cast<size_t>(node)];
      nd.feature = best[s].feature;
      nd.threshold = best[s].threshold;
      nd.left = li;
      nd.right = li + 1;
      nd.gain = best[s].gain;
      nd.value = 0.0;
      finalize_leaf(tree, li);
      finalize_leaf(tree, li + 1);
      left_of[static_cast<size_t>(node)] = li;
      next.push_back(li);
      next.push_back(li + 1);
    }
    for (size_t i = 0; i < node_of_.size(); ++i) {
      int node = node_of_[i];
      if (node < 0 || static_cast<size_t>(node) >= n_nodes || left_of[static_cast<size_t>(node)] < 0) continue;
      const auto& nd = tree.nodes[static_cast<size_t>(node)];
      node_of_[i] = x_[i][static_cast<size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    }
    return next;
  }

  const RowList& x_;
  const std::vector<std::vector<uint32_t>>& sorted_;
  const GbdtParams& params_;
  std::vector<int> node_of_;
  std::vector<double> grad_sum_;
};

}  // namespace

double RegressionTree::predict(Row x) const {
  size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& nd = nodes[i];
    i = static_cast<size_t>(x[static_cast<size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[static_cast<size_t>(nodes[i].left)] = d[i] + 1;
    d[static_cast<size_t>(nodes[i].right)] = d[i] + 1;
    deepest = std::max(deepest, d[i] + 1);
  }
  return deepest;
}

GbdtModel train_gbdt(const RowList& x, const std::vector<int>& y, int classes,
                     const GbdtParams& params) {
  if (classes < 2) throw InvalidArgument("boosted trees need at least 2 classes");
  if (x.empty() || x.size() != y.size()) {
    throw InvalidArgument("boosted trees need matching, non-empty features and labels");
  }
  if (params.subsample <= 0.0 || params.subsample > 1.0) {
    throw InvalidArgument("subsample must lie in (0, 1]");
  }
  if (params.max_depth < 0 || params.n_estimators < 0) {
    throw InvalidArgument("max_depth and n_estimators must be non-negative");
  }
  const size_t n = x.size();
  const size_t dim = x.front().size();
  std::vector<size_t> class_count(static_cast<size_t>(classes), 0);
  for (size_t i = 0; i < n; ++i) {
    if (x[i].size() != dim) throw InvalidArgument("inconsistent feature dimension");
    if (y[i] < 0 || y[i] >= classes) {
      throw InvalidArgument("label " + std::to_string(y[i]) + " outside 0.." +
                            std::to_string(classes - 1));
    }
    ++class_count[static_cast<size_t>(y[i])];
  }
  for (int k = 0; k < classes; ++k) {
    if (class_count[static_cast<size_t>(k)] == 0) {
      throw InvalidArgument("class " + std::to_string(k) + " has no training rows");
    }
  }

  std::vector<std::vector<uint32_t>> sorted(dim);
  for (size_t f = 0; f < dim; ++f) {
    auto& idx = sorted[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](uint32_t a, uint32_t b) { return x[a][f] < x[b][f]; });
  }

  GbdtModel model;
  model.classes = classes;
  model.dim = dim;
  model.params = params;
  const size_t K = static_cast<size_t>(classes);
  std::vector<double> margin(n * K, 0.0);
  std::vector<double> grad(n), hess(n), prob(K);
  std::vector<std::vector<double>> all_grad(K, std::vector<double>(n)),
      all_hess(K, std::vector<double>(n));
  std::vector<uint8_t> in_sample(n, 1);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TreeBuilder builder(x, sorted, params);

  for (int round = 0; round < params.n_estimators; ++round) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < K; ++k) prob[k] = margin[i * K + k];
      softmax_inplace(prob);
      for (size_t k = 0; k < K; ++k) {
        const double p = prob[k];
        all_grad[k][i] = p - (static_cast<size_t>(y[i]) == k ? 1.0 : 0.0);
        // Scaled as in the reference softmax booster, so min_child_weight
        // keeps the meaning of the published settings.
        all_hess[k][i] = std::max(2.0 * p * (1.0 - p), 1e-16);
      }
    }
    if (params.subsample < 1.0) {
      for (size_t i = 0; i < n; ++i) in_sample[i] = unif(rng) < params.subsample ? 1 : 0;
    }
    for (size_t k = 0; k < K; ++k) {
      model.trees.push_back(builder.build(all_grad[k], all_hess[k], in_sample));
    }
    size_t errors = 0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < K; ++k) {
        margin[i * K + k] += model.trees[model.trees.size() - K + k].predict(x[i]);
        prob[k] = margin[i * K + k];
      }
      if (argmax(prob) != y[i]) ++errors;
    }
    model.train_error_history.push_back(static_cast<double>(errors) / static_cast<double>(n));
    ++model.rounds;
  }
  return model;
}

std::vector<double> predict_margins(const GbdtModel& model, Row x) {
  if (x.size() != model.dim) {
    throw InvalidArgument("input has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(model.dim));
  }
  std::vector<double> m(static_cast<size_t>(model.classes), 0.0);
  for (int r = 0; r < model.rounds; ++r) {
    for (int k = 0; k < model.classes; ++k) m[static_cast<size_t>(k)] += model.tree(r, k).predict(x);
  }
  return m;
}

GbdtPrediction predict_gbdt(const GbdtModel& model, Row x) {
  GbdtPrediction out;
  out.probabilities = predict_margins(model, x);
  softmax_inplace(out.probabilities);
  out.label = argmax(out.probabilities);
  return out;
}

void save_gbdt(std::ostream& out, const GbdtModel& model) {
  binio::put_header(out, kMagic, kVersion);
  binio::put<int32_t>(out, model.classes);
  binio::put<int32_t>(out, model.rounds);
  binio::put<uint64_t>(out, model.dim);
  const auto& p = model.params;
  binio::put<int32_t>(out, p.n_estimators);
  binio::put<int32_t>(out, p.max_depth);
  binio::put<double>(out, p.min_child_weight);
  binio::put<double>(out, p.subsample);
  binio::put<double>(out, p.lambda);
  binio::put<double>(out, p.learning_rate);
  binio::put<uint64_t>(out, p.seed);
  for (const auto& t : model.trees) {
    binio::put<uint32_t>(out, static_cast<uint32_t>(t.nodes.size()));
    for (const auto& nd : t.nodes) {
      binio::put<int32_t>(out, nd.feature);
      binio::put<float>(out, nd.threshold);
      binio::put<int32_t>(out, nd.left);
      binio::put<int32_t>(out, nd.right);
      binio::put<double>(out, nd.value);
      binio::put<double>(out, nd.hessian_sum);
      binio::put<double>(out, nd.gain);
    }
  }
}

GbdtModel load_gbdt(std::istream& in) {
  binio::expect_header(in, kMagic, kVersion);
  GbdtModel m;
  m.classes = binio::get<int32_t>(in);
  m.rounds = binio::get<int32_t>(in);
  m.dim = binio::get<uint64_t>(in);
  auto& p = m.params;
  p.n_estimators = binio::get<int32_t>(in);
  p.max_depth = binio::get<int32_t>(in);
  p.min_child_weight = binio::get<double>(in);
  p.subsample = binio::get<double>(in);
  p.lambda = binio::get<double>(in);
  p.learning_rate = binio::get<double>(in);
  p.seed = binio::get<uint64_t>(in);
  if (m.classes < 2 || m.rounds < 0 || m.rounds > 1000000) {
    throw SerializationError("boosted tree header out of range");
  }
  const size_t n_trees = static_cast<size_t>(m.rounds) * static_cast<size_t>(m.classes);
  m.trees.resize(n_trees);
  for (auto& t : m.trees) {
    auto n = binio::get<uint32_t>(in);
    if (n == 0) throw SerializationError("empty tree");
    t.nodes.resize(n);
    for (auto& nd : t.nodes) {
      nd.feature = binio::get<int32_t>(in);
      nd.threshold = binio::get<float>(in);
      nd.left = binio::get<int32_t>(in);
      nd.right = binio::get<int32_t>(in);
      nd.value = binio::get<double>(in);
      nd.hessian_sum = binio::get<double>(in);
      nd.gain = binio::get<double>(in);
    }
    for (size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& nd = t.nodes[i];
      if (nd.is_leaf()) continue;
      if (static_cast<size_t>(nd.feature) >= m.dim || nd.left <= static_cast<int>(i) ||
          nd.right <= static_cast<int>(i) || static_cast<size_t>(nd.left) >= n ||
          static_cast<size_t>(nd.right) >= n) {
        throw SerializationError("malformed tree node");
      }
    }
  }
  return m;
}

void dump_gbdt_text(std::ostream& out, const GbdtModel& model) {
  for (int r = 0; r < model.rounds; ++r) {
    for (int k = 0; k < model.classes; ++k) {
      const auto& t = model.tree(r, k);
      for (size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& nd = t.nodes[i];
        out << "round=" << r << " class=" << k << " node=" << i;
        if (nd.is_leaf()) {
          out << " leaf=" << nd.value;
        } else {
          out << " split=f" << nd.feature << "<" << nd.threshold << " yes=" << nd.left
              << " no=" << nd.right << " gain=" << nd.gain;
        }
        out << " cover=" << nd.hessian_sum << '\n';
      }
    }
  }
}

}  // namespace ecrecer
