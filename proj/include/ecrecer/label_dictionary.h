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

#ifndef ECRECER_LABEL_DICTIONARY_H_
#define ECRECER_LABEL_DICTIONARY_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecrecer/ec_number.h"
#include "ecrecer/protein.h"

namespace ecrecer {

using Label = uint32_t;

// Bijection between EC numbers and dense labels 0..size()-1, ordered by
// canonical EC text.
class LabelDictionary {
 public:
  LabelDictionary() = default;

  // `ecs` may contain duplicates; they are collapsed.
  static LabelDictionary from_ecs(std::vector<ECNumber> ecs);

  size_t size() const { return label_to_ec_.size(); }
  bool empty() const { return label_to_ec_.empty(); }
  bool contains(const ECNumber& ec) const { return ec_to_label_.count(ec) > 0; }
  std::optional<Label> find(const ECNumber& ec) const;
  // Throws InvalidArgument for unknown ECs / labels.
  Label label_of(const ECNumber& ec) const;
  const ECNumber& ec_of(Label label) const;
  const std::vector<ECNumber>& ecs() const { return label_to_ec_; }

  // Two-column TSV "ec<TAB>label", sorted by label.
  void write_tsv(std::ostream& out) const;
  static LabelDictionary read_tsv(std::istream& in);

  friend bool operator==(const LabelDictionary& a, const LabelDictionary& b) {
    return a.label_to_ec_ == b.label_to_ec_;
  }

 private:
  std::vector<ECNumber> label_to_ec_;
  std::unordered_map<ECNumber, Label, ECNumberHash> ec_to_label_;
};

// One label per distinct EC occurring in the records.
LabelDictionary build_label_dictionary(const std::vector<ProteinRecord>& records);

}  // namespace ecrecer

#endif  // ECRECER_LABEL_DICTIONARY_H_
