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

#include "ecrecer/linear.h"

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

constexpr std::string_view kMagic = "ECLINM01";
constexpr uint32_t kVersion = 1;

size_t common_dim(const RowList& a, const RowList& b) {
  size_t dim = !a.empty() ? a.front().size() : (!b.empty() ? b.front().size() : 0);
  for (const auto* rows : {&a, &b}) {
    for (Row r : *rows) {
      if (r.size() != dim) throw InvalidArgument("training vectors have inconsistent dimension");
      for (float v : r) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
      }
    }
  }
  return dim;
}

LinearModel from_dense(const std::vector<double>& w, double bias, LinearKind kind) {
  LinearModel m;
  m.dim = w.size();
  m.bias = bias;
  m.kind = kind;
  for (size_t j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) m.weights.emplace_back(static_cast<uint32_t>(j), w[j]);
  }
  return m;
}

double softplus(double z) {
  // log(1 + exp(z)) without overflow.
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot_dense(const std::vector<double>& w, Row x) {
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
  return s;
}

}  // namespace

double LinearModel::weight(uint32_t feature) const {
  auto it = std::lower_bound(weights.begin(), weights.end(), feature,
                             [](const auto& e, uint32_t f) { return e.first < f; });
  return (it != weights.end() && it->first == feature) ? it->second : 0.0;
}

std::vector<double> LinearModel::dense_weights() const {
  std::vector<double> w(dim, 0.0);
  for (const auto& [j, v] : weights) w[j] = v;
  return w;
}

LinearModel train_l2svm(const RowList& positives, const RowList& negatives,
                        const L2SvmParams& params) {
  if (positives.empty() || negatives.empty()) {
    throw InvalidArgument("L2-SVM training needs at least one positive and one negative");
  }
  if (params.c <= 0.0) throw InvalidArgument("SVM cost C must be positive");
  const size_t dim = common_dim(positives, negatives);
  const size_t n = positives.size() + negatives.size();
  auto row = [&](size_t i) { return i < positives.size() ? positives[i] : negatives[i - positives.size()]; };
  auto label = [&](size_t i) { return i < positives.size() ? 1.0 : -1.0; };

  const double diag = 0.5 / params.c;
  std::vector<double> w(dim, 0.0);
  double wb = 0.0;  // weight of the constant feature
  std::vector<double> alpha(n, 0.0), qd(n);
  for (size_t i = 0; i < n; ++i) {
    double sq = 1.0;
    for (float v : row(i)) sq += static_cast<double>(v) * v;
    qd[i] = sq + diag;
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);

  LinearModel model;
  model.meta.cost = params.c;
  auto dual_objective = [&] {
    double ww = wb * wb, aa = 0.0, sa = 0.0;
    for (double v : w) ww += v * v;
    for (double a : alpha) {
      aa += a * a;
      sa += a;
    }
    return 0.5 * ww + 0.5 * diag * aa - sa;
  };

  int iter = 0;
  while (iter < params.max_iter) {
    std::shuffle(order.begin(), order.end(), rng);
    double max_violation = 0.0;
    for (size_t i : order) {
      const double y = label(i);
      Row x = row(i);
      double g = y * (dot_dense(w, x) + wb) - 1.0 + diag * alpha[i];
      double pg = alpha[i] == 0.0 ? std::min(g, 0.0) : g;
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg == 0.0) continue;
      double old = alpha[i];
      alpha[i] = std::max(old - g / qd[i], 0.0);
      double delta = (alpha[i] - old) * y;
      if (delta == 0.0) continue;
      for (size_t j = 0; j < dim; ++j) w[j] += delta * x[j];
      wb += delta;
    }
    ++iter;
    model.meta.objective_history.push_back(dual_objective());
    if (max_violation < params.tol) break;
  }

  // An early stop can leave w(alpha) with a primal value above the zero
  // vector's C*n. Shrinking along the ray t*w, t in [0, 1], restores the bound.
  std::vector<double> margin(n);
  double ww = wb * wb;
  for (double v : w) ww += v * v;
  for (size_t i = 0; i < n; ++i) margin[i] = label(i) * (dot_dense(w, row(i)) + wb);
  auto ray_objective = [&](double t) {
    double loss = 0.0;
    for (double m : margin) {
      double h = std::max(0.0, 1.0 - t * m);
      loss += h * h;
    }
    return 0.5 * t * t * ww + params.c * loss;
  };
  if (ray_objective(1.0) > params.c * static_cast<double>(n)) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
      if (ray_objective(a) <= ray_objective(b)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    double t = ray_objective(lo) <= ray_objective(0.0) ? lo : 0.0;
    for (double& v : w) v *= t;
    wb *= t;
  }

  LinearModel out = from_dense(w, wb, LinearKind::L2Svm);
  out.meta = std::move(model.meta);
  out.meta.iterations = iter;
  out.meta.final_objective = out.meta.objective_history.empty() ? 0.0 : out.meta.objective_history.back();
  return out;
}

double l2svm_primal_objective(const LinearModel& model, const RowList& positives,
                              const RowList& negatives, double c) {
  double reg = model.bias * model.bias;
  for (const auto& [j, v] : model.weights) reg += v * v;
  double loss = 0.0;
  for (Row x : positives) {
    double m = std::max(0.0, 1.0 - decision(model, x));
    loss += m * m;
  }
  for (Row x : negatives) {
    double m = std::max(0.0, 1.0 + decision(model, x));
    loss += m * m;
  }
  return 0.5 * reg + c * loss;
}

double logistic_objective(const RowList& x, const std::vector<int>& y, double l2,
                          const std::vector<double>& w, double b) {
  double obj = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double t = y[i] ? 1.0 : -1.0;
    obj += softplus(-t * (dot_dense(w, x[i]) + b));
  }
  double ww = 0.0;
  for (double v : w) ww += v * v;
  return obj + 0.5 * l2 * ww;
}

std::vector<double> logistic_gradient(const RowList& x, const std::vector<int>& y, double l2,
                                      const std::vector<double>& w, double b) {
  std::vector<double> g(w.size() + 1, 0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    double r = sigmoid(dot_dense(w, x[i]) + b) - (y[i] ? 1.0 : 0.0);
    for (size_t j = 0; j < w.size(); ++j) g[j] += r * x[i][j];
    g.back() += r;
  }
  for (size_t j = 0; j < w.size(); ++j) g[j] += l2 * w[j];
  return g;
}

LinearModel train_logistic(const RowList& x, const std::vector<int>& y,
                           const LogisticParams& params) {
  if (x.empty()) throw InvalidArgument("logistic regression needs training data");
  if (x.size() != y.size()) throw InvalidArgument("feature and label counts differ");
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("logistic labels must be 0 or 1");
  }
  const size_t dim = common_dim(x, {});
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  double obj = logistic_objective(x, y, params.l2, w, b);
  double step = 1.0;
  LinearTrainMeta meta;
  meta.cost = params.l2;
  meta.objective_history.push_back(obj);

  int iter = 0;
  std::vector<double> w_new(dim);
  for (; iter < params.max_iter; ++iter) {
    auto g = logistic_gradient(x, y, params.l2, w, b);
    double gg = 0.0;
    for (double v : g) gg += v * v;
    if (std::sqrt(gg) < params.tol) break;
    step = std::min(step * 2.0, 1e6);
    double new_obj = obj;
    double b_new = b;
    while (true) {
      for (size_t j = 0; j < dim; ++j) w_new[j] = w[j] - step * g[j];
      b_new = b - step * g.back();
      new_obj = logistic_objective(x, y, params.l2, w_new, b_new);
      if (new_obj <= obj - 0.5 * step * gg || step < 1e-18) break;
      step *= 0.5;
    }
    if (!(new_obj < obj)) break;  // no further progress is representable
    w.swap(w_new);
    b = b_new;
    obj = new_obj;
    meta.objective_history.push_back(obj);
  }
  LinearModel model = from_dense(w, b, LinearKind::Logistic);
  meta.iterations = iter;
  meta.final_objective = obj;
  model.meta = std::move(meta);
  return model;
}

LinearModel sparsify(const LinearModel& model, double threshold) {
  if (threshold < 0.0) throw InvalidArgument("sparsify threshold must be non-negative");
  LinearModel out = model;
  out.weights.clear();
  for (const auto& e : model.weights) {
    if (std::abs(e.second) >= threshold && e.second != 0.0) out.weights.push_back(e);
  }
  return out;
}

double decision(const LinearModel& model, Row x) {
  if (x.size() != model.dim) {
    throw InvalidArgument("input has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(model.dim));
  }
  double s = model.bias;
  for (const auto& [j, v] : model.weights) s += v * x[j];
  return s;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double probability(const LinearModel& model, Row x) { return sigmoid(decision(model, x)); }

void save_linear_model(std::ostream& out, const LinearModel& model) {
  binio::put_header(out, kMagic, kVersion);
  binio::put<uint32_t>(out, static_cast<uint32_t>(model.kind));
  binio::put<uint64_t>(out, model.dim);
  binio::put<double>(out, model.bias);
  binio::put<double>(out, model.meta.cost);
  binio::put<int32_t>(out, model.meta.iterations);
  binio::put<double>(out, model.meta.final_objective);
  binio::put<uint64_t>(out, model.weights.size());
  for (const auto& [j, v] : model.weights) {
    binio::put<uint32_t>(out, j);
    binio::put<double>(out, v);
  }
}

LinearModel load_linear_model(std::istream& in) {
  binio::expect_header(in, kMagic, kVersion);
  LinearModel m;
  auto kind = binio::get<uint32_t>(in);
  if (kind > 1) throw SerializationError("unknown linear model kind");
  m.kind = static_cast<LinearKind>(kind);
  m.dim = binio::get<uint64_t>(in);
  m.bias = binio::get<double>(in);
  m.meta.cost = binio::get<double>(in);
  m.meta.iterations = binio::get<int32_t>(in);
  m.meta.final_objective = binio::get<double>(in);
  auto nnz = binio::get<uint64_t>(in);
  if (nnz > m.dim) throw SerializationError("more weights than features");
  m.weights.reserve(nnz);
  for (uint64_t i = 0; i < nnz; ++i) {
    auto j = binio::get<uint32_t>(in);
    auto v = binio::get<double>(in);
    if (j >= m.dim || (!m.weights.empty() && j <= m.weights.back().first) || v == 0.0 ||
        !std::isfinite(v)) {
      throw SerializationError("malformed sparse weight entry");
    }
    m.weights.emplace_back(j, v);
  }
  return m;
}

}  // namespace ecrecer
