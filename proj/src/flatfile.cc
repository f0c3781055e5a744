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

#include "ecrecer/flatfile.h"

#include <zlib.h>

#include <array>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

bool parse_enzyme_flag(std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "False" || s == "FALSE") return false;
  throw ParseError("invalid is_enzyme value '" + std::string(s) + "'");
}

}  // namespace

std::string read_maybe_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path.string());
  std::string out;
  std::array<char, 1 << 16> buf;
  int n;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
    out.append(buf.data(), static_cast<size_t>(n));
  }
  int err = 0;
  const char* msg = gzerror(f, &err);
  std::string message = msg ? msg : "";
  gzclose(f);
  if (n < 0 || (err != Z_OK && err != Z_STREAM_END)) {
    throw Error("read error in " + path.string() + ": " + message);
  }
  return out;
}

FlatfileContents parse_flatfile(const std::filesystem::path& path) {
  return parse_flatfile_text(read_maybe_gzip(path));
}

FlatfileContents parse_flatfile_text(const std::string& text) {
  FlatfileContents result;
  std::istringstream in(text);
  std::string line;
  long row = 0;

  if (!std::getline(in, line)) throw FormatError("empty flat file: missing header", 1);
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::unordered_map<std::string, size_t> column_of;
  auto header = split(line, '\t');
  for (size_t i = 0; i < header.size(); ++i) column_of[std::string(trim(header[i]))] = i;
  std::array<size_t, std::size(kFlatfileColumns)> col{};
  size_t needed = 0;
  for (size_t i = 0; i < std::size(kFlatfileColumns); ++i) {
    auto it = column_of.find(kFlatfileColumns[i]);
    if (it == column_of.end()) {
      throw FormatError(std::string("missing column '") + kFlatfileColumns[i] + "'", row);
    }
    col[i] = it->second;
    needed = std::max(needed, it->second + 1);
  }
  enum { kId, kName, kEc, kIsEnzyme, kFunctionCount, kSeq, kDateIntegrated, kDateSeqUpdate };

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < needed) {
      throw FormatError("expected " + std::to_string(needed) + " columns, found " +
                            std::to_string(fields.size()),
                        row);
    }
    ProteinRecord r;
    r.id = std::string(trim(fields[col[kId]]));
    try {
      if (r.id.empty()) throw ParseError("empty id");
      r.name = std::string(trim(fields[col[kName]]));
      size_t replaced = 0;
      r.seq = normalize_sequence(fields[col[kSeq]], &replaced);
      if (r.seq.empty()) throw ParseError("empty sequence");
      result.replaced_symbols += replaced;
      r.ecs = parse_ec_list(fields[col[kEc]]);
      r.is_enzyme = parse_enzyme_flag(fields[col[kIsEnzyme]]);
      if (r.is_enzyme && r.ecs.empty()) throw ParseError("enzyme without EC numbers");
      if (!r.is_enzyme && !r.ecs.empty()) throw ParseError("non-enzyme with EC numbers");
      if (r.ecs.size() > static_cast<size_t>(kMaxFunctionCount)) {
        throw ParseError("more than 8 EC numbers");
      }
      r.function_count = static_cast<int>(r.ecs.size());
      r.date_integrated = parse_date(fields[col[kDateIntegrated]]);
      r.date_sequence_update = parse_date(fields[col[kDateSeqUpdate]]);
    } catch (const ParseError& e) {
      result.rejects.push_back({row, r.id, e.what()});
      continue;
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

void write_flatfile(std::ostream& out, const std::vector<ProteinRecord>& records) {
  for (size_t i = 0; i < std::size(kFlatfileColumns); ++i) {
    out << (i ? "\t" : "") << kFlatfileColumns[i];
  }
  out << '\n';
  for (const auto& r : records) {
    out << r.id << '\t' << r.name << '\t' << format_ec_list(r.ecs) << '\t'
        << (r.is_enzyme ? 1 : 0) << '\t' << r.function_count << '\t' << r.seq << '\t'
        << format_date(r.date_integrated) << '\t' << format_date(r.date_sequence_update)
        << '\n';
  }
}

void write_rejects(std::ostream& out, const std::vector<RejectedRow>& rejects) {
  out << "row\tid\treason\n";
  for (const auto& r : rejects) out << r.row << '\t' << r.id << '\t' << r.reason << '\n';
}

std::filesystem::path rejects_sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".rejects.tsv";
  return p;
}

}  // namespace ecrecer
