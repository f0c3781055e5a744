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

#include "ecrecer/metrics.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

double or_zero(const std::optional<double>& v) { return v.value_or(0.0); }

std::unordered_map<std::string, const Prediction*> index_predictions(
    const std::vector<Prediction>& preds, const std::vector<ProteinRecord>& gold) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.id, &p).second) {
      throw InvalidArgument("duplicate prediction id " + p.id);
    }
  }
  std::set<std::string> gold_ids;
  for (const auto& g : gold) {
    if (!gold_ids.insert(g.id).second) throw InvalidArgument("duplicate gold id " + g.id);
    if (!by_id.count(g.id)) throw InvalidArgument("no prediction for gold id " + g.id);
  }
  for (const auto& p : preds) {
    if (!gold_ids.count(p.id)) throw InvalidArgument("prediction id " + p.id + " has no gold record");
  }
  return by_id;
}

struct ClassTally {
  uint64_t tp = 0, fp = 0, fn = 0, up = 0;
};

// Turns per-class tallies into one-vs-all counts. Records not touching a
// class are its true negatives (or unclassified negatives when abstained).
template <typename Map, typename Name>
std::vector<ClassRow> finish_classes(const Map& tallies, uint64_t answered, uint64_t abstained,
                                     Name name) {
  std::vector<ClassRow> rows;
  rows.reserve(tallies.size());
  for (const auto& [key, t] : tallies) {
    ClassRow row;
    row.name = name(key);
    row.counts.tp = t.tp;
    row.counts.fp = t.fp;
    row.counts.fn = t.fn;
    row.counts.up = t.up;
    row.counts.un = abstained - t.up;
    row.counts.tn = answered - t.tp - t.fp - t.fn;
    row.metrics = binary_metrics(row.counts);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string count_name(const int& c) { return std::to_string(c); }
std::string ec_name(const ECNumber& ec) { return format_ec(ec); }

struct EcLess {
  bool operator()(const ECNumber& a, const ECNumber& b) const { return ec_text_less(a, b); }
};

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  up += o.up;
  un += o.un;
  return *this;
}

MetricReport binary_metrics(const ConfusionCounts& c) {
  MetricReport r;
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp),
               tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn),
               up = static_cast<double>(c.up);
  r.acc = ratio(tp + tn, static_cast<double>(c.total()));
  r.ppv = ratio(tp, tp + fp);
  r.npv = ratio(tn, tn + fn);
  r.recall = ratio(tp, tp + fn + up);
  if (r.ppv && r.recall) r.f1 = ratio(2.0 * *r.ppv * *r.recall, *r.ppv + *r.recall);
  return r;
}

MacroReport macro_metrics(const std::vector<ConfusionCounts>& per_class) {
  if (per_class.empty()) throw InvalidArgument("macro metrics need at least one class");
  MacroReport m;
  m.classes = per_class.size();
  for (const auto& c : per_class) {
    auto r = binary_metrics(c);
    m.macc += or_zero(r.acc);
    m.mpr += or_zero(r.ppv);
    m.mrecall += or_zero(r.recall);
    m.mf1_perclass += or_zero(r.f1);
  }
  const double n = static_cast<double>(per_class.size());
  m.macc /= n;
  m.mpr /= n;
  m.mrecall /= n;
  m.mf1_perclass /= n;
  m.mf1_harmonic = ratio(2.0 * m.mpr * m.mrecall, m.mpr + m.mrecall);
  return m;
}

TaskReport evaluate_task(const std::vector<Prediction>& preds,
                         const std::vector<ProteinRecord>& gold, Task task,
                         const LabelDictionary* dictionary) {
  auto by_id = index_predictions(preds, gold);
  TaskReport rep;
  rep.task = task;
  rep.gold_records = gold.size();

  if (task == Task::EnzymeOrNot) {
    for (const auto& g : gold) {
      const Prediction& p = *by_id.at(g.id);
      ++rep.evaluated;
      if (p.abstained) {
        ++rep.abstained;
        ++(g.is_enzyme ? rep.binary.up : rep.binary.un);
      } else if (g.is_enzyme) {
        ++(p.is_enzyme ? rep.binary.tp : rep.binary.fn);
      } else {
        ++(p.is_enzyme ? rep.binary.fp : rep.binary.tn);
      }
    }
    rep.binary_metrics = binary_metrics(rep.binary);
    rep.accuracy = or_zero(rep.binary_metrics.acc);
    return rep;
  }

  uint64_t answered = 0, correct = 0;
  if (task == Task::FunctionCount) {
    std::map<int, ClassTally> tallies;
    for (const auto& g : gold) {
      if (!g.is_enzyme) {
        ++rep.excluded_non_enzyme;
        continue;
      }
      const Prediction& p = *by_id.at(g.id);
      ++rep.evaluated;
      auto& gt = tallies[g.function_count];
      if (p.abstained) {
        ++rep.abstained;
        ++gt.up;
        continue;
      }
      ++answered;
      int pc = p.is_enzyme ? p.function_count : 0;
      if (pc == g.function_count) {
        ++gt.tp;
        ++correct;
      } else {
        ++gt.fn;
        if (pc >= 1 && pc <= kMaxFunctionCount) ++tallies[pc].fp;
      }
    }
    rep.per_class = finish_classes(tallies, answered, rep.abstained, &count_name);
  } else {
    std::map<ECNumber, ClassTally, EcLess> tallies;
    for (const auto& g : gold) {
      if (!g.is_enzyme) {
        ++rep.excluded_non_enzyme;
        continue;
      }
      if (dictionary && std::any_of(g.ecs.begin(), g.ecs.end(), [&](const ECNumber& ec) {
            return !dictionary->contains(ec);
          })) {
        ++rep.excluded_unseen;
        continue;
      }
      const Prediction& p = *by_id.at(g.id);
      ++rep.evaluated;
      std::set<ECNumber, EcLess> gs(g.ecs.begin(), g.ecs.end());
      if (p.abstained) {
        ++rep.abstained;
        for (const auto& ec : gs) ++tallies[ec].up;
        continue;
      }
      ++answered;
      std::set<ECNumber, EcLess> ps;
      if (p.is_enzyme) {
        for (const auto& s : p.ranked_ecs) ps.insert(s.ec);
      }
      for (const auto& ec : gs) ++(ps.count(ec) ? tallies[ec].tp : tallies[ec].fn);
      for (const auto& ec : ps) {
        if (!gs.count(ec)) ++tallies[ec].fp;
      }
      if (ps == gs) ++correct;
    }
    rep.per_class = finish_classes(tallies, answered, rep.abstained, &ec_name);
    for (const auto& row : rep.per_class) rep.micro += row.counts;
    const double tp = static_cast<double>(rep.micro.tp);
    rep.micro_precision = ratio(tp, tp + static_cast<double>(rep.micro.fp));
    rep.micro_recall =
        ratio(tp, tp + static_cast<double>(rep.micro.fn) + static_cast<double>(rep.micro.up));
    if (rep.micro_precision && rep.micro_recall) {
      rep.micro_f1 = ratio(2.0 * *rep.micro_precision * *rep.micro_recall,
                           *rep.micro_precision + *rep.micro_recall);
    }
  }
  rep.accuracy = rep.evaluated ? static_cast<double>(correct) / static_cast<double>(rep.evaluated)
                               : 0.0;
  if (!rep.per_class.empty()) {
    std::vector<ConfusionCounts> counts;
    for (const auto& row : rep.per_class) counts.push_back(row.counts);
    rep.macro = macro_metrics(counts);
  }
  return rep;
}

double ec_micro_f1(const std::vector<Prediction>& preds, const std::vector<ProteinRecord>& gold,
                   const LabelDictionary* dictionary) {
  return or_zero(evaluate_task(preds, gold, Task::ECNumber, dictionary).micro_f1);
}

double enzyme_f1(const std::vector<Prediction>& preds, const std::vector<ProteinRecord>& gold) {
  return or_zero(evaluate_task(preds, gold, Task::EnzymeOrNot).binary_metrics.f1);
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

void write_report_tsv(std::ostream& out, const TaskReport& r) {
  auto row = [&](const char* key, const std::string& value) {
    out << key << '\t' << value << '\n';
  };
  out << "metric\tvalue\n";
  row("task", std::string(to_string(r.task)));
  row("gold_records", std::to_string(r.gold_records));
  row("evaluated", std::to_string(r.evaluated));
  row("excluded_unseen", std::to_string(r.excluded_unseen));
  row("excluded_non_enzyme", std::to_string(r.excluded_non_enzyme));
  row("abstained", std::to_string(r.abstained));
  if (r.task == Task::EnzymeOrNot) {
    const auto& c = r.binary;
    row("tp", std::to_string(c.tp));
    row("fp", std::to_string(c.fp));
    row("tn", std::to_string(c.tn));
    row("fn", std::to_string(c.fn));
    row("up", std::to_string(c.up));
    row("un", std::to_string(c.un));
    row("acc", format_metric(r.binary_metrics.acc));
    row("ppv", format_metric(r.binary_metrics.ppv));
    row("npv", format_metric(r.binary_metrics.npv));
    row("recall", format_metric(r.binary_metrics.recall));
    row("f1", format_metric(r.binary_metrics.f1));
    return;
  }
  row("accuracy", format_metric(r.accuracy));
  if (r.macro) {
    row("classes", std::to_string(r.macro->classes));
    row("macro_acc", format_metric(r.macro->macc));
    row("macro_precision", format_metric(r.macro->mpr));
    row("macro_recall", format_metric(r.macro->mrecall));
    row("macro_f1_per_class", format_metric(r.macro->mf1_perclass));
    row("macro_f1_harmonic", format_metric(r.macro->mf1_harmonic));
  }
  if (r.task == Task::ECNumber) {
    row("micro_precision", format_metric(r.micro_precision));
    row("micro_recall", format_metric(r.micro_recall));
    row("micro_f1", format_metric(r.micro_f1));
  }
}

void write_per_class_tsv(std::ostream& out, const TaskReport& r) {
  out << "class\ttp\tfp\ttn\tfn\tup\tun\tacc\tppv\tnpv\trecall\tf1\n";
  for (const auto& row : r.per_class) {
    const auto& c = row.counts;
    const auto& m = row.metrics;
    out << row.name << '\t' << c.tp << '\t' << c.fp << '\t' << c.tn << '\t' << c.fn << '\t'
        << c.up << '\t' << c.un << '\t' << format_metric(m.acc) << '\t' << format_metric(m.ppv)
        << '\t' << format_metric(m.npv) << '\t' << format_metric(m.recall) << '\t'
        << format_metric(m.f1) << '\n';
  }
}

void write_report_text(std::ostream& out, const TaskReport& r) {
  char buf[160];
  out << "task: " << to_string(r.task) << '\n';
  std::snprintf(buf, sizeof(buf), "records: %zu gold, %zu evaluated, %zu abstained\n",
                r.gold_records, r.evaluated, r.abstained);
  out << buf;
  if (r.excluded_unseen || r.excluded_non_enzyme) {
    std::snprintf(buf, sizeof(buf), "excluded: %zu unseen EC, %zu non-enzyme\n",
                  r.excluded_unseen, r.excluded_non_enzyme);
    out << buf;
  }
  if (r.task == Task::EnzymeOrNot) {
    const auto& c = r.binary;
    std::snprintf(buf, sizeof(buf), "TP %llu  FP %llu  TN %llu  FN %llu  UP %llu  UN %llu\n",
                  static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fp),
                  static_cast<unsigned long long>(c.tn), static_cast<unsigned long long>(c.fn),
                  static_cast<unsigned long long>(c.up), static_cast<unsigned long long>(c.un));
    out << buf;
    const auto& m = r.binary_metrics;
    out << "ACC " << format_metric(m.acc) << "  PPV " << format_metric(m.ppv) << "  NPV "
        << format_metric(m.npv) << "  Recall " << format_metric(m.recall) << "  F1 "
        << format_metric(m.f1) << '\n';
    return;
  }
  out << "accuracy " << format_metric(r.accuracy) << '\n';
  if (r.macro) {
    out << "macro over " << r.macro->classes << " classes: mACC " << format_metric(r.macro->macc)
        << "  mPR " << format_metric(r.macro->mpr) << "  mRecall "
        << format_metric(r.macro->mrecall) << "  mF1(per-class) "
        << format_metric(r.macro->mf1_perclass) << "  mF1(harmonic) "
        << format_metric(r.macro->mf1_harmonic) << '\n';
  }
  if (r.task == Task::ECNumber) {
    out << "micro: precision " << format_metric(r.micro_precision) << "  recall "
        << format_metric(r.micro_recall) << "  F1 " << format_metric(r.micro_f1) << '\n';
  }
}

std::vector<NamedCounts> read_counts_table(std::istream& in) {
  std::vector<NamedCounts> rows;
  std::string line;
  size_t row = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (header) {
      header = false;
      if (cols.size() != 7 || trim(cols[0]) != "tool") {
        throw FormatError("counts table header must be tool, tp, fp, tn, fn, up, un", row);
      }
      continue;
    }
    if (cols.size() != 7) throw FormatError("counts table row needs 7 columns", row);
    NamedCounts nc;
    nc.name = std::string(trim(cols[0]));
    uint64_t* fields[] = {&nc.counts.tp, &nc.counts.fp, &nc.counts.tn,
                          &nc.counts.fn, &nc.counts.up, &nc.counts.un};
    for (size_t i = 0; i < 6; ++i) {
      std::string cell(trim(cols[i + 1]));
      size_t used = 0;
      try {
        if (cell.empty() || cell[0] == '-') throw std::invalid_argument("negative");
        *fields[i] = std::stoull(cell, &used);
      } catch (const std::exception&) {
        throw FormatError("bad count '" + cell + "'", row);
      }
      if (used != cell.size()) throw FormatError("bad count '" + cell + "'", row);
    }
    rows.push_back(std::move(nc));
  }
  return rows;
}

void write_counts_report(std::ostream& out, const std::vector<NamedCounts>& rows) {
  out << "tool\tacc\tppv\tnpv\trecall\tf1\n";
  for (const auto& r : rows) {
    auto m = binary_metrics(r.counts);
    out << r.name << '\t' << format_metric(m.acc) << '\t' << format_metric(m.ppv) << '\t'
        << format_metric(m.npv) << '\t' << format_metric(m.recall) << '\t'
        << format_metric(m.f1) << '\n';
  }
}

}  // namespace ecrecer
