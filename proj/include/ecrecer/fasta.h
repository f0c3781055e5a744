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

#ifndef ECRECER_FASTA_H_
#define ECRECER_FASTA_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ecrecer {

struct FastaEntry {
  std::string id;
  std::string seq;

  friend bool operator==(const FastaEntry&, const FastaEntry&) = default;
};

// The id is the header token up to the first whitespace. Multi-line
// sequences are joined and uppercased. Throws ParseError on an empty
// sequence, on sequence text before the first header, or on duplicate ids
// (all duplicates are listed in the message).
std::vector<FastaEntry> parse_fasta_text(std::string_view text);
std::vector<FastaEntry> parse_fasta(const std::filesystem::path& path);

}  // namespace ecrecer

#endif  // ECRECER_FASTA_H_
