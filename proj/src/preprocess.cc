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

#include "ecrecer/preprocess.h"

#include <algorithm>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace ecrecer {

PreprocessResult preprocess(std::vector<ProteinRecord> records) {
  PreprocessResult result;
  PreprocessReport& rep = result.report;
  rep.raw = records.size();

  // 1. ids whose sequence changed.
  std::unordered_map<std::string, std::string> first_seq;
  std::unordered_set<std::string> changed;
  for (const auto& r : records) {
    auto [it, inserted] = first_seq.emplace(r.id, r.seq);
    if (!inserted && it->second != r.seq) changed.insert(r.id);
  }
  rep.changed_seq = changed.size();
  std::vector<ProteinRecord> stage;
  stage.reserve(records.size());
  for (auto& r : records) {
    if (changed.count(r.id)) {
      ++rep.changed_seq_rows;
    } else {
      stage.push_back(std::move(r));
    }
  }

  // 2. one row per sequence.
  std::unordered_map<std::string_view, size_t> keeper;
  for (size_t i = 0; i < stage.size(); ++i) {
    auto [it, inserted] = keeper.emplace(stage[i].seq, i);
    if (inserted) continue;
    const auto& cur = stage[it->second];
    const auto& cand = stage[i];
    if (cand.date_integrated < cur.date_integrated ||
        (cand.date_integrated == cur.date_integrated && cand.id < cur.id)) {
      it->second = i;
    }
  }
  std::vector<bool> keep(stage.size(), false);
  for (const auto& [seq, idx] : keeper) keep[idx] = true;
  rep.dedup = stage.size() - keeper.size();

  for (size_t i = 0; i < stage.size(); ++i) {
    if (!keep[i]) continue;
    ProteinRecord r = std::move(stage[i]);
    // 3. canonical EC list: drop repeats, keep first occurrence order.
    std::vector<ECNumber> ecs;
    for (const auto& ec : r.ecs) {
      if (std::find(ecs.begin(), ecs.end(), ec) == ecs.end()) {
        ecs.push_back(ec);
      } else {
        ++rep.ec_collapsed;
      }
    }
    r.ecs = std::move(ecs);
    // 6. function count from the EC list.
    r.function_count = static_cast<int>(r.ecs.size());
    r.is_enzyme = !r.ecs.empty();
    result.clean.push_back(std::move(r));
  }

  // 4-5. dense labels.
  result.dictionary = build_label_dictionary(result.clean);

  rep.clean = result.clean.size();
  for (const auto& r : result.clean) (r.is_enzyme ? rep.enzymes : rep.non_enzymes)++;
  rep.distinct_ecs = result.dictionary.size();
  return result;
}

void write_preprocess_report(std::ostream& out, const PreprocessReport& r) {
  out << "step\tcount\n"
      << "raw\t" << r.raw << '\n'
      << "changed_seq_ids\t" << r.changed_seq << '\n'
      << "changed_seq_rows\t" << r.changed_seq_rows << '\n'
      << "dedup\t" << r.dedup << '\n'
      << "ec_collapsed\t" << r.ec_collapsed << '\n'
      << "clean\t" << r.clean << '\n'
      << "enzymes\t" << r.enzymes << '\n'
      << "non_enzymes\t" << r.non_enzymes << '\n'
      << "distinct_ecs\t" << r.distinct_ecs << '\n';
}

}  // namespace ecrecer
