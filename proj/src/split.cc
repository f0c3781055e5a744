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

#include "ecrecer/split.h"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ecrecer/error.h"

namespace ecrecer {
namespace {

bool enzyme_only(Task task) { return task != Task::EnzymeOrNot; }

}  // namespace

DatasetSplit chronological_split(const Snapshot& train, const Snapshot& test, Task task,
                                 SplitReport* report) {
  if (!(train.as_of < test.as_of)) {
    throw InvalidArgument("snapshot dates overlap: " + train.label + " (" +
                          format_date(train.as_of) + ") is not earlier than " + test.label +
                          " (" + format_date(test.as_of) + ")");
  }
  SplitReport rep;
  DatasetSplit split;
  split.task = task;
  std::unordered_set<std::string_view> train_seqs;
  for (const auto& r : train.records) {
    if (train.as_of < r.effective_date()) {
      ++rep.train_after_cutoff;
      continue;
    }
    // Sequence exclusion uses the full earlier snapshot regardless of task.
    train_seqs.insert(r.seq);
    if (enzyme_only(task) && !r.is_enzyme) {
      ++rep.non_enzyme_filtered;
      continue;
    }
    split.train.push_back(r);
  }
  for (const auto& r : test.records) {
    if (train_seqs.count(r.seq)) {
      ++rep.test_seen_sequence;
      continue;
    }
    if (!(train.as_of < r.effective_date())) {
      ++rep.test_before_cutoff;
      continue;
    }
    if (enzyme_only(task) && !r.is_enzyme) {
      ++rep.non_enzyme_filtered;
      continue;
    }
    split.test.push_back(r);
  }
  assert_no_leakage(split);
  if (report) *report = rep;
  return split;
}

void assert_no_leakage(const DatasetSplit& split) {
  std::unordered_set<std::string_view> seqs;
  for (const auto& r : split.train) seqs.insert(r.seq);
  for (const auto& r : split.test) {
    if (seqs.count(r.seq)) {
      throw Error("train/test leakage: sequence of " + r.id + " occurs in both halves");
    }
  }
}

std::pair<std::vector<ProteinRecord>, std::vector<ProteinRecord>> validation_holdout(
    const std::vector<ProteinRecord>& records, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw InvalidArgument("validation fraction must lie in [0,1]");
  }
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    if (ra.effective_date() != rb.effective_date()) {
      return ra.effective_date() < rb.effective_date();
    }
    return ra.id < rb.id;
  });
  size_t n_val = static_cast<size_t>(fraction * static_cast<double>(records.size()) + 0.5);
  size_t n_fit = records.size() - n_val;
  std::vector<bool> is_val(records.size(), false);
  for (size_t i = n_fit; i < order.size(); ++i) is_val[order[i]] = true;
  std::pair<std::vector<ProteinRecord>, std::vector<ProteinRecord>> out;
  for (size_t i = 0; i < records.size(); ++i) {
    (is_val[i] ? out.second : out.first).push_back(records[i]);
  }
  return out;
}

std::array<size_t, kMaxFunctionCount + 1> function_count_histogram(
    const std::vector<ProteinRecord>& records) {
  std::array<size_t, kMaxFunctionCount + 1> h{};
  for (const auto& r : records) {
    if (r.function_count < 0 || r.function_count > kMaxFunctionCount) {
      throw InvalidArgument("record " + r.id + " has function count outside 0..8");
    }
    ++h[static_cast<size_t>(r.function_count)];
  }
  return h;
}

SnapshotDiff snapshot_diff(const Snapshot& a, const Snapshot& b) {
  SnapshotDiff d;
  std::unordered_map<std::string_view, bool> seq_a, seq_b;
  for (const auto& r : a.records) seq_a.emplace(r.seq, r.is_enzyme);
  for (const auto& r : b.records) seq_b.emplace(r.seq, r.is_enzyme);

  auto count = [](const std::vector<ProteinRecord>& rs, DiffRow& all, DiffRow& enz,
                  DiffRow& non, bool side_b) {
    for (const auto& r : rs) {
      (side_b ? all.count_b : all.count_a)++;
      DiffRow& cat = r.is_enzyme ? enz : non;
      (side_b ? cat.count_b : cat.count_a)++;
    }
  };
  count(a.records, d.records, d.enzymes, d.non_enzymes, false);
  count(b.records, d.records, d.enzymes, d.non_enzymes, true);

  for (const auto& [seq, enzyme] : seq_b) {
    if (seq_a.count(seq)) continue;
    ++d.records.added;
    ++(enzyme ? d.enzymes : d.non_enzymes).added;
  }
  for (const auto& [seq, enzyme] : seq_a) {
    if (seq_b.count(seq)) continue;
    ++d.records.deleted;
    ++(enzyme ? d.enzymes : d.non_enzymes).deleted;
  }

  std::set<std::string> ec_a, ec_b;
  for (const auto& r : a.records)
    for (const auto& ec : r.ecs) ec_a.insert(format_ec(ec));
  for (const auto& r : b.records)
    for (const auto& ec : r.ecs) ec_b.insert(format_ec(ec));
  d.distinct_ecs.count_a = ec_a.size();
  d.distinct_ecs.count_b = ec_b.size();
  for (const auto& e : ec_b) d.distinct_ecs.added += ec_a.count(e) ? 0 : 1;
  for (const auto& e : ec_a) d.distinct_ecs.deleted += ec_b.count(e) ? 0 : 1;
  return d;
}

void write_snapshot_diff(std::ostream& out, const SnapshotDiff& d) {
  out << "item\tsnapshot_a\tsnapshot_b\tdifference\tadded\tdeleted\n";
  auto row = [&](const char* name, const DiffRow& r) {
    out << name << '\t' << r.count_a << '\t' << r.count_b << '\t' << r.difference() << '\t'
        << r.added << '\t' << r.deleted << '\n';
  };
  row("records", d.records);
  row("non_enzyme", d.non_enzymes);
  row("enzyme", d.enzymes);
  row("distinct_ec", d.distinct_ecs);
}

}  // namespace ecrecer
