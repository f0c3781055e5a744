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

#ifndef ECRECER_FEATURE_MATRIX_H_
#define ECRECER_FEATURE_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

#include "ecrecer/error.h"

namespace ecrecer {

using Row = std::span<const float>;
using RowList = std::vector<Row>;

// Row-major dense matrix of float features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  Row row(size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<float> mutable_row(size_t i) { return {data_.data() + i * cols_, cols_}; }

  void append(Row r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw InvalidArgument("row width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  RowList row_list() const {
    RowList out;
    out.reserve(rows_);
    for (size_t i = 0; i < rows_; ++i) out.push_back(row(i));
    return out;
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<float> data_;
};

}  // namespace ecrecer

#endif  // ECRECER_FEATURE_MATRIX_H_
