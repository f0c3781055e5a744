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

#ifndef ECRECER_EC_NUMBER_H_
#define ECRECER_EC_NUMBER_H_

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ecrecer {

// Four-level Enzyme Commission code. A level value of 0 means "unknown" and
// is rendered as "-". Unknown levels only ever trail known ones.
class ECNumber {
 public:
  static constexpr int kLevels = 4;
  static constexpr uint32_t kUnknown = 0;
  static constexpr uint32_t kMaxTopClass = 7;

  // Fully unknown code "-.-.-.-".
  ECNumber() = default;

  // Throws ParseError when the levels are not prefix-complete or the top
  // class is outside 1..7.
  explicit ECNumber(const std::array<uint32_t, kLevels>& levels);

  uint32_t level(int i) const { return levels_.at(i); }
  bool known(int i) const { return levels_.at(i) != kUnknown; }
  const std::array<uint32_t, kLevels>& levels() const { return levels_; }

  friend bool operator==(const ECNumber&, const ECNumber&) = default;

 private:
  std::array<uint32_t, kLevels> levels_{};
};

// Parses "2.3.1.41", "1.14.-.-", "3.5.2" (padded) and "-.-.-.-".
ECNumber parse_ec(std::string_view text);

// Canonical dotted form, "-" for unknown levels.
std::string format_ec(const ECNumber& ec);

// Number of known leading levels (0..4).
int completeness_level(const ECNumber& ec);

// Splits a semicolon-delimited EC list, trimming whitespace around each
// entry. Empty input yields an empty list.
std::vector<ECNumber> parse_ec_list(std::string_view text);
std::string format_ec_list(const std::vector<ECNumber>& ecs);

// Ordering by canonical text, the order used for label dictionaries and
// ranked-output tie breaks.
bool ec_text_less(const ECNumber& a, const ECNumber& b);

struct ECNumberHash {
  size_t operator()(const ECNumber& ec) const noexcept;
};

}  // namespace ecrecer

#endif  // ECRECER_EC_NUMBER_H_
