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

#ifndef ECRECER_ALIGNMENT_H_
#define ECRECER_ALIGNMENT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecrecer/ec_number.h"
#include "ecrecer/protein.h"

namespace ecrecer {

struct CatalogEntry {
  std::string id;
  std::string seq;
  bool is_enzyme = false;
  std::vector<ECNumber> ecs;
};

struct Posting {
  uint32_t entry = 0;   // catalog index
  uint32_t offset = 0;  // k-mer start in the entry's sequence
};

// Exact k-mer postings over a catalog of labeled training sequences.
class KmerIndex {
 public:
  KmerIndex() = default;

  int k() const { return k_; }
  const std::vector<CatalogEntry>& catalog() const { return catalog_; }
  // Catalog entries shorter than k; present in the catalog, absent from postings.
  const std::vector<uint32_t>& short_entries() const { return short_entries_; }
  size_t posting_count() const { return posting_count_; }
  const std::vector<Posting>* postings(std::string_view kmer) const;
  std::optional<uint32_t> find_entry(const std::string& id) const;

  static uint64_t encode(std::string_view kmer);

  friend KmerIndex build_kmer_index(std::vector<CatalogEntry> catalog, int k);

 private:
  int k_ = 0;
  std::vector<CatalogEntry> catalog_;
  std::unordered_map<uint64_t, std::vector<Posting>> postings_;
  std::unordered_map<std::string, uint32_t> id_index_;
  std::vector<uint32_t> short_entries_;
  size_t posting_count_ = 0;
};

// k must lie in 3..7.
KmerIndex build_kmer_index(std::vector<CatalogEntry> catalog, int k);
KmerIndex build_kmer_index(const std::vector<ProteinRecord>& records, int k);

struct AlignmentScoring {
  int match = 1;
  int mismatch = -1;
  int gap_open = 11;   // a gap of length L costs gap_open + L * gap_extend
  int gap_extend = 1;
};

struct LocalAlignment {
  int score = 0;
  size_t matches = 0;
  size_t aligned_len = 0;  // alignment columns, gaps included
  size_t query_begin = 0, query_end = 0;  // half-open
  size_t target_begin = 0, target_end = 0;

  double identity() const {
    return aligned_len ? static_cast<double>(matches) / static_cast<double>(aligned_len) : 0.0;
  }
};

// Affine-gap Smith-Waterman restricted to cells with
// |(j - i) - diagonal| <= half_width, where i indexes the query and j the
// target. Traceback picks the first maximal cell in row-major order.
LocalAlignment banded_smith_waterman(std::string_view query, std::string_view target,
                                     long diagonal, long half_width,
                                     const AlignmentScoring& scoring = {});

struct Hit {
  uint32_t entry = 0;
  std::string id;
  double identity = 0.0;
  size_t aligned_len = 0;
  double score = 0.0;
  double query_coverage = 0.0;
  bool is_enzyme = false;
  std::vector<ECNumber> ecs;
};

struct AlignParams {
  double min_identity = 0.4;
  size_t min_seed_hits = 1;
  size_t max_candidates = 50;
  // Fraction of the query the local alignment must span.
  double min_query_coverage = 0.0;
  AlignmentScoring scoring;
};

// Candidates share at least min_seed_hits k-mer seeds with the query; the
// top max_candidates by seed count are aligned with a band of half-width
// 2|len_q - len_t| + 16 around their most common seed diagonal. The best
// hit (score, then identity, then smaller id) is returned when it passes
// the identity and coverage thresholds.
std::optional<Hit> align_query(const KmerIndex& index, std::string_view query,
                               const AlignParams& params = {});

struct TransferredLabels {
  bool is_enzyme = false;
  int function_count = 0;
  std::vector<ECNumber> ecs;
};

TransferredLabels transfer_labels(const Hit& hit);

// Reads 12-column tabular aligner output (qseqid sseqid pident length
// mismatch gapopen qstart qend sstart send evalue bitscore) and keeps the
// best row per query by bitscore. Subjects are resolved against the index
// catalog; unknown subjects throw FormatError.
std::map<std::string, Hit> read_tabular_hits(std::istream& in, const KmerIndex& index);

void save_catalog(std::ostream& out, const KmerIndex& index);
// Rebuilds the postings from the stored catalog.
KmerIndex load_catalog(std::istream& in);

}  // namespace ecrecer

#endif  // ECRECER_ALIGNMENT_H_
