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

#include "ecrecer/protein.h"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid date '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  std::string_view t = trim(text);
  auto parts = split(t, '-');
  if (parts.size() < 2 || parts.size() > 3) {
    throw ParseError("invalid date '" + std::string(t) + "'");
  }
  int y = parse_int(parts[0], t);
  int m = parse_int(parts[1], t);
  int d = parts.size() == 3 ? parse_int(parts[2], t) : 1;
  Date date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
            std::chrono::day(static_cast<unsigned>(d))};
  if (!date.ok()) throw ParseError("invalid date '" + std::string(t) + "'");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

int amino_index(char c) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (size_t i = 0; i < kAminoAlphabet.size(); ++i) {
      t[static_cast<unsigned char>(kAminoAlphabet[i])] = static_cast<int>(i);
    }
    return t;
  }();
  return table[static_cast<unsigned char>(c)];
}

std::string normalize_sequence(std::string_view seq, size_t* replaced) {
  std::string out;
  out.reserve(seq.size());
  size_t n_replaced = 0;
  for (char c : seq) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') continue;
    char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (amino_index(u) < 0) {
      u = 'X';
      ++n_replaced;
    }
    out.push_back(u);
  }
  if (replaced) *replaced = n_replaced;
  return out;
}

void validate_record(const ProteinRecord& r) {
  if (r.seq.empty()) throw InvalidArgument("record " + r.id + ": empty sequence");
  for (char c : r.seq) {
    if (amino_index(c) < 0) {
      throw InvalidArgument("record " + r.id + ": symbol '" + std::string(1, c) +
                            "' outside the amino-acid alphabet");
    }
  }
  if (!r.is_enzyme && (r.function_count != 0 || !r.ecs.empty())) {
    throw InvalidArgument("record " + r.id + ": non-enzyme carries EC numbers");
  }
  if (r.is_enzyme && (r.function_count < 1 || r.function_count > kMaxFunctionCount)) {
    throw InvalidArgument("record " + r.id + ": function count " +
                          std::to_string(r.function_count) + " outside 1..8");
  }
  if (static_cast<size_t>(r.function_count) != r.ecs.size()) {
    throw InvalidArgument("record " + r.id + ": function count disagrees with EC list");
  }
}

}  // namespace ecrecer
