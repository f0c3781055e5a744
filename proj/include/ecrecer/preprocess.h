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

#ifndef ECRECER_PREPROCESS_H_
#define ECRECER_PREPROCESS_H_

#include <iosfwd>
#include <vector>

#include "ecrecer/label_dictionary.h"
#include "ecrecer/protein.h"

namespace ecrecer {

// Per-step accounting. Removals are counted in rows so that
// raw == clean + changed_seq_rows + dedup always holds.
struct PreprocessReport {
  size_t raw = 0;
  size_t changed_seq = 0;       // ids whose sequence differs between rows
  size_t changed_seq_rows = 0;  // rows dropped because of those ids
  size_t dedup = 0;             // rows dropped as duplicate sequences
  size_t ec_collapsed = 0;      // repeated ECs folded within a record
  size_t clean = 0;
  size_t enzymes = 0;
  size_t non_enzymes = 0;
  size_t distinct_ecs = 0;

  size_t removed() const { return changed_seq_rows + dedup; }
};

struct PreprocessResult {
  std::vector<ProteinRecord> clean;
  PreprocessReport report;
  LabelDictionary dictionary;
};

// Steps, in order: drop ids whose sequence changed across rows; keep one row
// per distinct sequence (earliest date_integrated, then smallest id);
// canonicalize EC lists; build the label dictionary; set function_count from
// the EC list. Survivors keep their input order.
PreprocessResult preprocess(std::vector<ProteinRecord> records);

void write_preprocess_report(std::ostream& out, const PreprocessReport& report);

}  // namespace ecrecer

#endif  // ECRECER_PREPROCESS_H_
