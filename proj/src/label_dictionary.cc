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

#include "ecrecer/label_dictionary.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {

LabelDictionary LabelDictionary::from_ecs(std::vector<ECNumber> ecs) {
  std::vector<std::pair<std::string, ECNumber>> keyed;
  keyed.reserve(ecs.size());
  for (const auto& ec : ecs) keyed.emplace_back(format_ec(ec), ec);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  LabelDictionary dict;
  dict.label_to_ec_.reserve(keyed.size());
  for (auto& [text, ec] : keyed) {
    dict.ec_to_label_.emplace(ec, static_cast<Label>(dict.label_to_ec_.size()));
    dict.label_to_ec_.push_back(ec);
  }
  return dict;
}

std::optional<Label> LabelDictionary::find(const ECNumber& ec) const {
  auto it = ec_to_label_.find(ec);
  if (it == ec_to_label_.end()) return std::nullopt;
  return it->second;
}

Label LabelDictionary::label_of(const ECNumber& ec) const {
  auto it = ec_to_label_.find(ec);
  if (it == ec_to_label_.end()) {
    throw InvalidArgument("EC " + format_ec(ec) + " is not in the label dictionary");
  }
  return it->second;
}

const ECNumber& LabelDictionary::ec_of(Label label) const {
  if (label >= label_to_ec_.size()) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range");
  }
  return label_to_ec_[label];
}

void LabelDictionary::write_tsv(std::ostream& out) const {
  for (size_t i = 0; i < label_to_ec_.size(); ++i) {
    out << format_ec(label_to_ec_[i]) << '\t' << i << '\n';
  }
}

LabelDictionary LabelDictionary::read_tsv(std::istream& in) {
  std::vector<ECNumber> ecs;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw FormatError("label dictionary needs 2 columns", row);
    Label label = 0;
    auto field = trim(cols[1]);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), label);
    if (ec != std::errc() || ptr != field.data() + field.size() || label != ecs.size()) {
      throw FormatError("label dictionary labels must be dense and sorted", row);
    }
    ecs.push_back(parse_ec(cols[0]));
  }
  LabelDictionary dict = from_ecs(ecs);
  if (dict.label_to_ec_ != ecs) {
    throw FormatError("label dictionary is not in canonical EC order");
  }
  return dict;
}

LabelDictionary build_label_dictionary(const std::vector<ProteinRecord>& records) {
  std::vector<ECNumber> ecs;
  for (const auto& r : records) ecs.insert(ecs.end(), r.ecs.begin(), r.ecs.end());
  return LabelDictionary::from_ecs(std::move(ecs));
}

}  // namespace ecrecer
