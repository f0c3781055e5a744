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

#ifndef ECRECER_PROTEIN_H_
#define ECRECER_PROTEIN_H_

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "ecrecer/ec_number.h"

namespace ecrecer {

// Calendar date at day granularity.
using Date = std::chrono::year_month_day;

// Parses YYYY-MM-DD; also accepts YYYY-MM (first day of month).
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

// The 25 symbols accepted in sequences; index in this string is the one-hot
// position.
inline constexpr std::string_view kAminoAlphabet = "ACDEFGHIKLMNPQRSTVWYBZXUO";
inline constexpr int kAlphabetSize = 25;

// Position of `c` in kAminoAlphabet, or -1.
int amino_index(char c);

// Uppercases and maps symbols outside the alphabet to 'X'. `replaced`, when
// given, receives the number of substituted characters.
std::string normalize_sequence(std::string_view seq, size_t* replaced = nullptr);

inline constexpr int kMaxFunctionCount = 8;

struct ProteinRecord {
  std::string id;
  std::string name;
  std::string seq;
  bool is_enzyme = false;
  int function_count = 0;
  std::vector<ECNumber> ecs;
  Date date_integrated{};
  Date date_sequence_update{};

  // Later of the two dates; used for chronological placement.
  Date effective_date() const {
    return date_integrated < date_sequence_update ? date_sequence_update : date_integrated;
  }
};

// Throws InvalidArgument naming the violated invariant.
void validate_record(const ProteinRecord& r);

}  // namespace ecrecer

#endif  // ECRECER_PROTEIN_H_
