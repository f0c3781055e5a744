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

#ifndef ECRECER_TESTS_TEST_UTIL_H_
#define ECRECER_TESTS_TEST_UTIL_H_

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ecrecer/ec_number.h"
#include "ecrecer/feature_matrix.h"
#include "ecrecer/protein.h"

namespace ecrecer::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "ecrecer-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string random_protein(std::mt19937_64& rng, size_t len) {
  static const std::string kStandard = "ACDEFGHIKLMNPQRSTVWY";
  std::uniform_int_distribution<size_t> pick(0, kStandard.size() - 1);
  std::string s(len, 'A');
  for (auto& c : s) c = kStandard[pick(rng)];
  return s;
}

// Copy of `seq` with `n` positions replaced by a different residue.
inline std::string mutate(const std::string& seq, size_t n, std::mt19937_64& rng) {
  static const std::string kStandard = "ACDEFGHIKLMNPQRSTVWY";
  std::string out = seq;
  std::vector<size_t> pos(seq.size());
  for (size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  std::shuffle(pos.begin(), pos.end(), rng);
  std::uniform_int_distribution<size_t> pick(0, kStandard.size() - 1);
  for (size_t i = 0; i < n && i < pos.size(); ++i) {
    char c;
    do c = kStandard[pick(rng)];
    while (c == seq[pos[i]]);
    out[pos[i]] = c;
  }
  return out;
}

inline ProteinRecord make_record(const std::string& id, const std::string& seq,
                                 const std::vector<std::string>& ecs,
                                 const std::string& date = "2017-01-01") {
  ProteinRecord r;
  r.id = id;
  r.name = id;
  r.seq = seq;
  for (const auto& e : ecs) r.ecs.push_back(parse_ec(e));
  r.is_enzyme = !r.ecs.empty();
  r.function_count = static_cast<int>(r.ecs.size());
  r.date_integrated = parse_date(date);
  r.date_sequence_update = r.date_integrated;
  return r;
}

inline FeatureMatrix matrix_of(const std::vector<std::vector<float>>& rows) {
  FeatureMatrix out(0, rows.empty() ? 0 : rows.front().size());
  for (const auto& r : rows) out.append(r);
  return out;
}

// Isotropic Gaussian clusters: `centers` rows, `per_center` points each.
inline FeatureMatrix gaussian_points(const FeatureMatrix& centers, size_t per_center,
                                     double sigma, std::mt19937_64& rng,
                                     std::vector<int>* labels = nullptr) {
  std::normal_distribution<double> noise(0.0, sigma);
  FeatureMatrix out(0, centers.cols());
  std::vector<float> v(centers.cols());
  for (size_t c = 0; c < centers.rows(); ++c) {
    for (size_t i = 0; i < per_center; ++i) {
      auto ctr = centers.row(c);
      for (size_t d = 0; d < v.size(); ++d) v[d] = static_cast<float>(ctr[d] + noise(rng));
      out.append(v);
      if (labels) labels->push_back(static_cast<int>(c));
    }
  }
  return out;
}

inline FeatureMatrix uniform_points(size_t n, size_t dim, std::mt19937_64& rng,
                                    double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  FeatureMatrix out(n, dim);
  for (auto& x : out.data()) x = static_cast<float>(u(rng));
  return out;
}

// Protein families: each family has a random ancestor and members carrying
// ~8% substitutions plus the family's labels. Every fourth family is
// non-enzymatic, every fifth enzymatic family is bifunctional. Dates rise
// with the member index, so every family appears in every period.
inline std::vector<ProteinRecord> family_corpus(size_t families, size_t members,
                                                uint64_t seed, size_t min_len = 60,
                                                size_t max_len = 120) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> len(min_len, max_len);
  std::vector<ProteinRecord> out;
  size_t enzymatic = 0;
  for (size_t f = 0; f < families; ++f) {
    std::string ancestor = random_protein(rng, len(rng));
    std::vector<std::string> ecs;
    if (f % 4 != 3) {
      ecs.push_back(std::to_string(1 + f % 7) + "." + std::to_string(1 + f % 5) + "." +
                    std::to_string(1 + f % 3) + "." + std::to_string(1 + f));
      if (enzymatic % 5 == 4) {
        ecs.push_back(std::to_string(1 + (f + 3) % 7) + ".9." + std::to_string(1 + f % 4) + "." +
                      std::to_string(100 + f));
      }
      ++enzymatic;
    }
    for (size_t m = 0; m < members; ++m) {
      size_t idx = out.size();
      size_t when = m * families + f;  // members spread over time
      int day = static_cast<int>(when % 28) + 1;
      int month = static_cast<int>((when / 28) % 12) + 1;
      int year = 2016 + static_cast<int>((when / 336) % 2);
      char date[16];
      std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
      char id[16];
      std::snprintf(id, sizeof(id), "P%05zu", idx);
      out.push_back(make_record(id, mutate(ancestor, ancestor.size() / 12, rng), ecs, date));
    }
  }
  return out;
}

}  // namespace ecrecer::testing

#endif  // ECRECER_TESTS_TEST_UTIL_H_
