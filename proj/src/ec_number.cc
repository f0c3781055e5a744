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

#include "ecrecer/ec_number.h"

#include <charconv>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {

ECNumber::ECNumber(const std::array<uint32_t, kLevels>& levels)
    : levels_(levels) {
  bool seen_unknown = false;
  for (int i = 0; i < kLevels; ++i) {
    if (levels_[i] == kUnknown) {
      seen_unknown = true;
    } else if (seen_unknown) {
      throw ParseError("EC level " + std::to_string(i + 1) +
                       " is known but a preceding level is unknown");
    }
  }
  if (levels_[0] > kMaxTopClass) {
    throw ParseError("EC top class " + std::to_string(levels_[0]) +
                     " is outside 1..7");
  }
}

ECNumber parse_ec(std::string_view text) {
  std::string_view body = trim(text);
  if (body.size() > 3 && (body.substr(0, 3) == "EC " || body.substr(0, 3) == "EC:")) {
    body = trim(body.substr(3));
  }
  if (body.empty()) throw ParseError("empty EC number");

  std::vector<std::string_view> parts = split(body, '.');
  if (parts.size() > static_cast<size_t>(ECNumber::kLevels)) {
    throw ParseError("EC number '" + std::string(body) + "' has more than 4 components");
  }
  std::array<uint32_t, ECNumber::kLevels> levels{};
  for (size_t i = 0; i < parts.size(); ++i) {
    std::string_view part = trim(parts[i]);
    if (part == "-") continue;
    if (!part.empty() && (part.front() == 'n' || part.front() == 'N')) {
      throw PreliminaryEcError("preliminary EC component '" + std::string(part) +
                               "' in '" + std::string(body) + "'");
    }
    uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() ||
        value == 0) {
      throw ParseError("invalid EC component '" + std::string(part) + "' in '" +
                       std::string(body) + "'");
    }
    levels[i] = value;
  }
  return ECNumber(levels);
}

std::string format_ec(const ECNumber& ec) {
  std::string out;
  for (int i = 0; i < ECNumber::kLevels; ++i) {
    if (i) out += '.';
    out += ec.known(i) ? std::to_string(ec.level(i)) : "-";
  }
  return out;
}

int completeness_level(const ECNumber& ec) {
  int n = 0;
  while (n < ECNumber::kLevels && ec.known(n)) ++n;
  return n;
}

std::vector<ECNumber> parse_ec_list(std::string_view text) {
  std::vector<ECNumber> out;
  if (trim(text).empty()) return out;
  for (std::string_view part : split(text, ';')) {
    if (trim(part).empty()) continue;
    out.push_back(parse_ec(part));
  }
  return out;
}

std::string format_ec_list(const std::vector<ECNumber>& ecs) {
  std::string out;
  for (size_t i = 0; i < ecs.size(); ++i) {
    if (i) out += ';';
    out += format_ec(ecs[i]);
  }
  return out;
}

bool ec_text_less(const ECNumber& a, const ECNumber& b) {
  return format_ec(a) < format_ec(b);
}

size_t ECNumberHash::operator()(const ECNumber& ec) const noexcept {
  size_t h = 1469598103934665603ull;
  for (uint32_t v : ec.levels()) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace ecrecer
