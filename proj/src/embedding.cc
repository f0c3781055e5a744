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

#include "ecrecer/embedding.h"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ecrecer/binary_io.h"
#include "ecrecer/error.h"
#include "ecrecer/flatfile.h"
#include "ecrecer/protein.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

constexpr std::string_view kMagic = "ECRVEC01";
constexpr uint32_t kVersion = 1;

struct KindName {
  EmbeddingTag::Kind kind;
  std::string_view name;
};
constexpr KindName kKindNames[] = {
    {EmbeddingTag::Kind::OneHot, "onehot"}, {EmbeddingTag::Kind::Unirep, "unirep"},
    {EmbeddingTag::Kind::ESM0, "esm0"},     {EmbeddingTag::Kind::ESM32, "esm32"},
    {EmbeddingTag::Kind::ESM33, "esm33"},
};

}  // namespace

std::string EmbeddingTag::to_string() const {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return std::string(kn.name);
  }
  return "custom:" + custom_name;
}

EmbeddingTag EmbeddingTag::parse(std::string_view text) {
  for (const auto& kn : kKindNames) {
    if (kn.name == text) return {kn.kind, {}};
  }
  if (text.substr(0, 7) == "custom:") return {Kind::Custom, std::string(text.substr(7))};
  return {Kind::Custom, std::string(text)};
}

EmbeddingTable::EmbeddingTable(EmbeddingTag tag, size_t dim)
    : tag_(std::move(tag)), matrix_(0, dim) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be positive");
}

void EmbeddingTable::add(const std::string& id, Row vec) {
  if (vec.size() != dim()) {
    throw InvalidArgument("vector for " + id + " has " + std::to_string(vec.size()) +
                          " entries, table dim is " + std::to_string(dim()));
  }
  for (float v : vec) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite value in vector for " + id);
  }
  if (!index_.emplace(id, ids_.size()).second) {
    throw InvalidArgument("duplicate embedding id " + id);
  }
  ids_.push_back(id);
  matrix_.append(vec);
}

Row EmbeddingTable::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw InvalidArgument("embedding table " + tag_.to_string() + " has no vector for " + id);
  }
  return matrix_.row(it->second);
}

std::optional<Row> EmbeddingTable::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return matrix_.row(it->second);
}

void one_hot_encode_into(std::string_view seq, size_t max_len, std::span<float> out) {
  std::fill(out.begin(), out.end(), 0.0f);
  static const int x_index = amino_index('X');
  size_t n = std::min(seq.size(), max_len);
  for (size_t i = 0; i < n; ++i) {
    int idx = amino_index(static_cast<char>(std::toupper(static_cast<unsigned char>(seq[i]))));
    if (idx < 0) idx = x_index;
    out[i * kAlphabetSize + static_cast<size_t>(idx)] = 1.0f;
  }
}

std::vector<float> one_hot_encode(std::string_view seq, size_t max_len) {
  if (max_len == 0) throw InvalidArgument("one-hot max_len must be at least 1");
  std::vector<float> out(max_len * kAlphabetSize);
  one_hot_encode_into(seq, max_len, out);
  return out;
}

void write_embedding_tsv(std::ostream& out, const EmbeddingTable& table) {
  for (size_t i = 0; i < table.size(); ++i) {
    out << table.ids()[i];
    for (float v : table.matrix().row(i)) out << '\t' << format_float(v);
    out << '\n';
  }
}

void write_embedding_binary(std::ostream& out, const EmbeddingTable& table) {
  uint32_t id_width = 0;
  for (const auto& id : table.ids()) id_width = std::max<uint32_t>(id_width, id.size());
  binio::put_header(out, kMagic, kVersion);
  binio::put<uint32_t>(out, static_cast<uint32_t>(table.dim()));
  binio::put<uint64_t>(out, table.size());
  binio::put<uint32_t>(out, id_width);
  binio::put_string(out, table.tag().to_string());
  std::string padded(id_width, '\0');
  for (size_t i = 0; i < table.size(); ++i) {
    const auto& id = table.ids()[i];
    std::fill(padded.begin(), padded.end(), '\0');
    std::memcpy(padded.data(), id.data(), id.size());
    out.write(padded.data(), id_width);
    auto row = table.matrix().row(i);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

EmbeddingTable read_embedding_tsv(std::istream& in, EmbeddingTag tag,
                                  std::optional<size_t> expected_dim) {
  std::optional<EmbeddingTable> table;
  std::string line;
  long row = 0;
  std::vector<float> vec;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw FormatError("embedding row has no values", row);
    vec.clear();
    for (size_t c = 1; c < cols.size(); ++c) {
      auto f = trim(cols[c]);
      float v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("invalid embedding value '" + std::string(f) + "'", row);
      }
      if (!std::isfinite(v)) throw FormatError("non-finite embedding value", row);
      vec.push_back(v);
    }
    if (!table) {
      if (expected_dim && *expected_dim != vec.size()) {
        throw FormatError("embedding dim " + std::to_string(vec.size()) +
                              " does not match expected " + std::to_string(*expected_dim),
                          row);
      }
      table.emplace(tag, vec.size());
    }
    if (vec.size() != table->dim()) {
      throw FormatError("ragged embedding row: " + std::to_string(vec.size()) +
                            " values, expected " + std::to_string(table->dim()),
                        row);
    }
    try {
      table->add(std::string(trim(cols[0])), vec);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what(), row);
    }
  }
  if (!table) throw FormatError("embedding table is empty");
  return std::move(*table);
}

EmbeddingTable read_embedding_binary(std::istream& in, std::optional<size_t> expected_dim) {
  binio::expect_header(in, kMagic, kVersion);
  auto dim = binio::get<uint32_t>(in);
  auto count = binio::get<uint64_t>(in);
  auto id_width = binio::get<uint32_t>(in);
  auto tag = EmbeddingTag::parse(binio::get_string(in, 4096));
  if (dim == 0) throw FormatError("embedding container has dim 0");
  if (expected_dim && *expected_dim != dim) {
    throw FormatError("embedding dim " + std::to_string(dim) + " does not match expected " +
                      std::to_string(*expected_dim));
  }
  EmbeddingTable table(tag, dim);
  std::string id_buf(id_width, '\0');
  std::vector<float> vec(dim);
  for (uint64_t i = 0; i < count; ++i) {
    in.read(id_buf.data(), id_width);
    in.read(reinterpret_cast<char*>(vec.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw FormatError("truncated embedding container", static_cast<long>(i + 1));
    std::string id(id_buf.c_str());
    try {
      table.add(id, vec);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what(), static_cast<long>(i + 1));
    }
  }
  return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path,
                                    std::optional<size_t> expected_dim,
                                    std::optional<EmbeddingTag> tag) {
  std::string data = read_maybe_gzip(path);
  std::istringstream in(data);
  if (data.size() >= kMagic.size() && data.compare(0, kMagic.size(), kMagic) == 0) {
    auto table = read_embedding_binary(in, expected_dim);
    if (tag && !(table.tag() == *tag)) {
      throw FormatError("embedding container tag " + table.tag().to_string() +
                        " does not match requested " + tag->to_string());
    }
    return table;
  }
  return read_embedding_tsv(in, tag.value_or(EmbeddingTag{EmbeddingTag::Kind::Custom,
                                                          path.stem().string()}),
                            expected_dim);
}

void save_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  auto ext = path.extension().string();
  if (ext == ".tsv" || ext == ".txt") {
    write_embedding_tsv(out, table);
  } else {
    write_embedding_binary(out, table);
  }
}

}  // namespace ecrecer
