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

#ifndef ECRECER_EMBEDDING_H_
#define ECRECER_EMBEDDING_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecrecer/feature_matrix.h"

namespace ecrecer {

// Provenance of an embedding table. Kinds are ordered; the order is the
// final tie-break in embedding selection.
struct EmbeddingTag {
  enum class Kind { OneHot, Unirep, ESM0, ESM32, ESM33, Custom };
  Kind kind = Kind::Custom;
  std::string custom_name;  // only for Custom

  std::string to_string() const;
  static EmbeddingTag parse(std::string_view text);

  friend bool operator==(const EmbeddingTag&, const EmbeddingTag&) = default;
  friend bool operator<(const EmbeddingTag& a, const EmbeddingTag& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.custom_name < b.custom_name;
  }
};

// Fixed-width vectors keyed by record id. Row order is insertion order.
class EmbeddingTable {
 public:
  EmbeddingTable(EmbeddingTag tag, size_t dim);

  const EmbeddingTag& tag() const { return tag_; }
  size_t dim() const { return matrix_.cols(); }
  size_t size() const { return ids_.size(); }

  // Throws InvalidArgument on a duplicate id, wrong width or non-finite value.
  void add(const std::string& id, Row vec);

  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  // Throws InvalidArgument for unknown ids.
  Row at(const std::string& id) const;
  std::optional<Row> find(const std::string& id) const;
  const std::vector<std::string>& ids() const { return ids_; }
  const FeatureMatrix& matrix() const { return matrix_; }

 private:
  EmbeddingTag tag_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, size_t> index_;
  FeatureMatrix matrix_;
};

inline constexpr size_t kDefaultOneHotMaxLen = 1000;

// max_len blocks of 25 indicators; longer sequences are truncated, shorter
// ones zero-padded. Symbols outside the alphabet count as X.
std::vector<float> one_hot_encode(std::string_view seq, size_t max_len);
void one_hot_encode_into(std::string_view seq, size_t max_len, std::span<float> out);

// TSV: "id<TAB>v1<TAB>...<TAB>vdim" per row. The tag is not stored in TSV.
void write_embedding_tsv(std::ostream& out, const EmbeddingTable& table);

// Binary container: 8-byte magic "ECRVEC01", uint32 version, uint32 dim,
// uint64 count, uint32 id_width, tag string (uint32 length + bytes), then
// `count` fixed-width rows of id_width zero-padded id bytes followed by dim
// little-endian float32 values.
void write_embedding_binary(std::ostream& out, const EmbeddingTable& table);

// Loads either format (binary detected by magic). Ragged rows and non-finite
// values throw FormatError with the row number; a dim different from
// expected_dim throws FormatError.
EmbeddingTable load_embedding_table(const std::filesystem::path& path,
                                    std::optional<size_t> expected_dim = std::nullopt,
                                    std::optional<EmbeddingTag> tag = std::nullopt);
EmbeddingTable read_embedding_tsv(std::istream& in, EmbeddingTag tag,
                                  std::optional<size_t> expected_dim = std::nullopt);
EmbeddingTable read_embedding_binary(std::istream& in,
                                     std::optional<size_t> expected_dim = std::nullopt);

void save_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table);

}  // namespace ecrecer

#endif  // ECRECER_EMBEDDING_H_
