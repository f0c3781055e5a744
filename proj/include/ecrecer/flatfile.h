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

#ifndef ECRECER_FLATFILE_H_
#define ECRECER_FLATFILE_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecrecer/protein.h"

namespace ecrecer {

// Column contract of the tab-separated protein extraction. Column order in
// the file is free; the header names are fixed.
inline constexpr const char* kFlatfileColumns[] = {
    "id", "name", "ec", "is_enzyme", "function_count", "seq", "date_integrated",
    "date_seq_update"};

struct RejectedRow {
  long row = 0;  // 1-based line number, header is row 1
  std::string id;
  std::string reason;
};

struct FlatfileContents {
  std::vector<ProteinRecord> records;
  std::vector<RejectedRow> rejects;
  size_t replaced_symbols = 0;  // residues mapped to X
};

// Reads plain or gzip-compressed TSV. A missing header column or a row with
// too few fields throws FormatError; rows with bad EC numbers or inconsistent
// labels are skipped and reported in `rejects`.
FlatfileContents parse_flatfile(const std::filesystem::path& path);
FlatfileContents parse_flatfile_text(const std::string& text);

void write_flatfile(std::ostream& out, const std::vector<ProteinRecord>& records);
void write_rejects(std::ostream& out, const std::vector<RejectedRow>& rejects);

// "<path>.rejects.tsv"
std::filesystem::path rejects_sidecar_path(const std::filesystem::path& path);

// Reads a whole plain or gzip file into memory.
std::string read_maybe_gzip(const std::filesystem::path& path);

}  // namespace ecrecer

#endif  // ECRECER_FLATFILE_H_
