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

#ifndef ECRECER_SPLIT_H_
#define ECRECER_SPLIT_H_

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecrecer/protein.h"
#include "ecrecer/task.h"

namespace ecrecer {

// Preprocessed records of one database release. `as_of` is the release
// cutoff; records dated after it do not belong to the snapshot.
struct Snapshot {
  std::string label;  // e.g. "2018-02"
  Date as_of{};
  std::vector<ProteinRecord> records;
};

struct DatasetSplit {
  std::vector<ProteinRecord> train;
  std::vector<ProteinRecord> test;
  Task task = Task::EnzymeOrNot;
};

struct SplitReport {
  size_t train_after_cutoff = 0;   // earlier-snapshot rows dated past the cutoff
  size_t test_seen_sequence = 0;   // later-snapshot rows whose sequence is in train
  size_t test_before_cutoff = 0;   // novel sequences dated on/before the cutoff
  size_t non_enzyme_filtered = 0;  // rows dropped for enzyme-only tasks
};

// Train is the earlier snapshot (enzymes only for FunctionCount/ECNumber);
// test is the later snapshot's records with a sequence absent from train and
// an effective date after the cutoff. Throws InvalidArgument when the
// snapshots' dates overlap. The leakage check runs on every split.
DatasetSplit chronological_split(const Snapshot& train, const Snapshot& test, Task task,
                                 SplitReport* report = nullptr);

// Throws Error if any sequence occurs in both halves.
void assert_no_leakage(const DatasetSplit& split);

// Holds out the latest `fraction` of records (by effective date, then id) as
// validation. Returns {fit, validation}.
std::pair<std::vector<ProteinRecord>, std::vector<ProteinRecord>> validation_holdout(
    const std::vector<ProteinRecord>& records, double fraction = 0.1);

// Histogram of function counts; index c holds the number of records with c
// functions (index 0 = non-enzymes).
std::array<size_t, kMaxFunctionCount + 1> function_count_histogram(
    const std::vector<ProteinRecord>& records);

struct DiffRow {
  size_t count_a = 0;
  size_t count_b = 0;
  size_t added = 0;
  size_t deleted = 0;
  long long difference() const {
    return static_cast<long long>(count_b) - static_cast<long long>(count_a);
  }
  friend bool operator==(const DiffRow&, const DiffRow&) = default;
};

// Record-level changes keyed by sequence, split by enzyme flag, plus the
// distinct-EC vocabulary change.
struct SnapshotDiff {
  DiffRow records;
  DiffRow non_enzymes;
  DiffRow enzymes;
  DiffRow distinct_ecs;
};

SnapshotDiff snapshot_diff(const Snapshot& a, const Snapshot& b);
void write_snapshot_diff(std::ostream& out, const SnapshotDiff& d);

}  // namespace ecrecer

#endif  // ECRECER_SPLIT_H_
