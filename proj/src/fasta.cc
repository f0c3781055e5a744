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

#include "ecrecer/fasta.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "ecrecer/error.h"
#include "ecrecer/flatfile.h"
#include "ecrecer/text.h"

namespace ecrecer {

std::vector<FastaEntry> parse_fasta_text(std::string_view text) {
  std::vector<FastaEntry> entries;
  size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '>') {
      std::string_view header = trim(line.substr(1));
      size_t ws = header.find_first_of(" \t");
      std::string id(header.substr(0, ws));
      if (id.empty()) {
        throw ParseError("FASTA header without id at line " + std::to_string(line_no));
      }
      entries.push_back({std::move(id), {}});
      continue;
    }
    if (line.front() == ';') continue;
    if (entries.empty()) {
      throw ParseError("sequence data before first FASTA header at line " +
                       std::to_string(line_no));
    }
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      entries.back().seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  std::set<std::string> seen, duplicates;
  for (const auto& e : entries) {
    if (!seen.insert(e.id).second) duplicates.insert(e.id);
  }
  if (!duplicates.empty()) {
    std::string list;
    for (const auto& d : duplicates) list += (list.empty() ? "" : ", ") + d;
    throw ParseError("duplicate FASTA ids: " + list);
  }
  for (const auto& e : entries) {
    if (e.seq.empty()) throw ParseError("empty sequence for FASTA entry '" + e.id + "'");
  }
  return entries;
}

std::vector<FastaEntry> parse_fasta(const std::filesystem::path& path) {
  return parse_fasta_text(read_maybe_gzip(path));
}

}  // namespace ecrecer
