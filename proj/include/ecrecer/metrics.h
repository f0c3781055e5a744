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

#ifndef ECRECER_METRICS_H_
#define ECRECER_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecrecer/label_dictionary.h"
#include "ecrecer/prediction.h"
#include "ecrecer/protein.h"
#include "ecrecer/task.h"

namespace ecrecer {

// One-vs-all counts. `up` / `un` hold gold positives / negatives the tool
// declined to classify.
struct ConfusionCounts {
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0, up = 0, un = 0;

  uint64_t total() const { return tp + fp + tn + fn + up + un; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Empty optionals mark a zero denominator.
struct MetricReport {
  std::optional<double> acc, ppv, npv, recall, f1;
};

// ACC = (TP+TN)/all, PPV = TP/(TP+FP), NPV = TN/(TN+FN),
// Recall = TP/(TP+FN+UP), F1 = 2 PPV Recall/(PPV+Recall).
MetricReport binary_metrics(const ConfusionCounts& c);

struct MacroReport {
  size_t classes = 0;
  double macc = 0.0;
  double mpr = 0.0;
  double mrecall = 0.0;
  double mf1_perclass = 0.0;                // mean of per-class F1
  std::optional<double> mf1_harmonic;       // 2 mPR mRecall / (mPR + mRecall)
};

// Unweighted means over classes; an undefined per-class value contributes 0.
// Throws InvalidArgument on an empty list.
MacroReport macro_metrics(const std::vector<ConfusionCounts>& per_class);

struct ClassRow {
  std::string name;
  ConfusionCounts counts;
  MetricReport metrics;
};

struct TaskReport {
  Task task = Task::EnzymeOrNot;
  size_t gold_records = 0;
  size_t evaluated = 0;
  size_t excluded_unseen = 0;      // EC task: gold carries an EC absent from the dictionary
  size_t excluded_non_enzyme = 0;  // count and EC tasks score enzymes only
  size_t abstained = 0;
  // Exact-answer accuracy over evaluated records; a multifunctional record
  // needs the whole EC set to match.
  double accuracy = 0.0;
  ConfusionCounts binary;          // enzyme task
  MetricReport binary_metrics;     // enzyme task
  std::vector<ClassRow> per_class; // count and EC tasks, sorted by class
  std::optional<MacroReport> macro;
  // EC task: counts pooled over every class.
  ConfusionCounts micro;
  std::optional<double> micro_precision, micro_recall, micro_f1;
};

// Predictions and gold are matched by id; a prediction without gold, a gold
// record without prediction or a repeated id throws InvalidArgument. For the
// EC task, `dictionary` (the training labels) drives unseen-EC exclusion;
// without it nothing is excluded.
TaskReport evaluate_task(const std::vector<Prediction>& preds,
                         const std::vector<ProteinRecord>& gold, Task task,
                         const LabelDictionary* dictionary = nullptr);

// Micro-averaged F1 over exact EC matches; 0 when undefined.
double ec_micro_f1(const std::vector<Prediction>& preds, const std::vector<ProteinRecord>& gold,
                   const LabelDictionary* dictionary = nullptr);
// F1 of the enzyme class; 0 when undefined.
double enzyme_f1(const std::vector<Prediction>& preds, const std::vector<ProteinRecord>& gold);

// Summary as two-column "metric<TAB>value" rows; undefined values print NA.
void write_report_tsv(std::ostream& out, const TaskReport& report);
// Per-class counts and metrics, one row per class.
void write_per_class_tsv(std::ostream& out, const TaskReport& report);
void write_report_text(std::ostream& out, const TaskReport& report);

// Named confusion-count rows, e.g. published tool comparisons. TSV header
// "tool tp fp tn fn up un".
struct NamedCounts {
  std::string name;
  ConfusionCounts counts;
};
std::vector<NamedCounts> read_counts_table(std::istream& in);
// One row per tool with ACC, PPV, NPV, Recall and F1 to four decimals.
void write_counts_report(std::ostream& out, const std::vector<NamedCounts>& rows);

std::string format_metric(const std::optional<double>& v);

}  // namespace ecrecer

#endif  // ECRECER_METRICS_H_
