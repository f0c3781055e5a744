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

#include "ecrecer/prediction.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

constexpr std::string_view kHeader = "id\tis_enzyme\tfunction_count\tecs\tscores\tsource";

bool parse_bool_field(std::string_view s, long row) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "True" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "False" || s == "no") return false;
  throw FormatError("invalid boolean '" + std::string(s) + "'", row);
}

double parse_double_field(std::string_view s, long row) {
  s = trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("invalid number '" + std::string(s) + "'", row);
  }
  return v;
}

}  // namespace

std::string_view to_string(PredictionSource s) {
  switch (s) {
    case PredictionSource::Alignment: return "alignment";
    case PredictionSource::Agents: return "agents";
    case PredictionSource::External: return "external";
  }
  return "agents";
}

PredictionSource parse_prediction_source(std::string_view s) {
  s = trim(s);
  if (s == "alignment") return PredictionSource::Alignment;
  if (s == "agents") return PredictionSource::Agents;
  if (s == "external") return PredictionSource::External;
  throw ParseError("unknown prediction source '" + std::string(s) + "'");
}

std::vector<ECNumber> Prediction::ecs() const {
  std::vector<ECNumber> out;
  out.reserve(ranked_ecs.size());
  for (const auto& s : ranked_ecs) out.push_back(s.ec);
  return out;
}

void write_prediction_header(std::ostream& out) { out << kHeader << '\n'; }

void write_prediction_row(std::ostream& out, const Prediction& p) {
  out << p.id << '\t';
  if (!p.abstained) out << (p.is_enzyme ? 1 : 0);
  out << '\t';
  if (!p.abstained) out << p.function_count;
  out << '\t';
  for (size_t i = 0; i < p.ranked_ecs.size(); ++i) {
    if (i) out << ';';
    out << format_ec(p.ranked_ecs[i].ec);
  }
  out << '\t';
  for (size_t i = 0; i < p.ranked_ecs.size(); ++i) {
    if (i) out << ';';
    out << format_double(p.ranked_ecs[i].score);
  }
  out << '\t' << to_string(p.source) << '\n';
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
  write_prediction_header(out);
  for (const auto& p : preds) write_prediction_row(out, p);
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  long row = 0;
  bool full_format = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line == kHeader) {
      full_format = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    Prediction p;
    p.id = std::string(trim(cols[0]));
    if (p.id.empty()) throw FormatError("missing id", row);
    std::string_view enzyme_field = cols.size() > 1 ? trim(cols[1]) : std::string_view{};
    if (full_format) {
      if (cols.size() != 6) throw FormatError("prediction rows need 6 columns", row);
      auto ecs = parse_ec_list(cols[3]);
      auto scores_text = trim(cols[4]);
      std::vector<std::string_view> scores;
      if (!scores_text.empty()) scores = split(scores_text, ';');
      if (scores.size() != ecs.size()) throw FormatError("scores do not match ECs", row);
      for (size_t i = 0; i < ecs.size(); ++i) {
        p.ranked_ecs.push_back({ecs[i], parse_double_field(scores[i], row)});
      }
      p.source = parse_prediction_source(cols[5]);
      if (enzyme_field.empty()) {
        p.abstained = true;
      } else {
        p.is_enzyme = parse_bool_field(enzyme_field, row);
        p.function_count = static_cast<int>(parse_double_field(cols[2], row));
      }
    } else {
      if (cols.size() > 3) throw FormatError("external predictions need at most 3 columns", row);
      auto ecs = cols.size() > 2 ? parse_ec_list(cols[2]) : std::vector<ECNumber>{};
      p.source = PredictionSource::External;
      for (const auto& ec : ecs) p.ranked_ecs.push_back({ec, 1.0});
      if (enzyme_field.empty() && ecs.empty()) {
        p.abstained = true;
      } else {
        p.is_enzyme = enzyme_field.empty() ? true : parse_bool_field(enzyme_field, row);
        if (!p.is_enzyme && !ecs.empty()) {
          throw FormatError("non-enzyme prediction carries EC numbers", row);
        }
        p.function_count = static_cast<int>(ecs.size());
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> load_external_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions file " + path);
  return read_predictions(in);
}

}  // namespace ecrecer
