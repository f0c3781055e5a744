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

#include "ecrecer/alignment.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>

#include "ecrecer/binary_io.h"
#include "ecrecer/error.h"
#include "ecrecer/text.h"

namespace ecrecer {
namespace {

constexpr std::string_view kMagic = "ECKMER01";
constexpr uint32_t kVersion = 1;
constexpr int kNegInf = std::numeric_limits<int>::min() / 4;

enum : uint8_t {
  kStop = 0,
  kDiag = 1,
  kFromE = 2,
  kFromF = 3,
  kEOpen = 4,   // E cell entered from H
  kFOpen = 8,   // F cell entered from H
};

int symbol(char c) {
  int idx = amino_index(c);
  return idx < 0 ? amino_index('X') : idx;
}

}  // namespace

uint64_t KmerIndex::encode(std::string_view kmer) {
  uint64_t code = 0;
  for (char c : kmer) code = code * kAlphabetSize + static_cast<uint64_t>(symbol(c));
  return code;
}

const std::vector<Posting>* KmerIndex::postings(std::string_view kmer) const {
  if (static_cast<int>(kmer.size()) != k_) return nullptr;
  auto it = postings_.find(encode(kmer));
  return it == postings_.end() ? nullptr : &it->second;
}

std::optional<uint32_t> KmerIndex::find_entry(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

KmerIndex build_kmer_index(std::vector<CatalogEntry> catalog, int k) {
  if (k < 3 || k > 7) throw InvalidArgument("k-mer length must lie in 3..7");
  if (catalog.size() > UINT32_MAX) throw InvalidArgument("catalog too large");
  KmerIndex index;
  index.k_ = k;
  index.catalog_ = std::move(catalog);
  const size_t ku = static_cast<size_t>(k);
  for (uint32_t e = 0; e < index.catalog_.size(); ++e) {
    const auto& entry = index.catalog_[e];
    index.id_index_.emplace(entry.id, e);
    if (entry.seq.size() < ku) {
      index.short_entries_.push_back(e);
      continue;
    }
    for (size_t off = 0; off + ku <= entry.seq.size(); ++off) {
      index.postings_[KmerIndex::encode(std::string_view(entry.seq).substr(off, ku))].push_back(
          {e, static_cast<uint32_t>(off)});
      ++index.posting_count_;
    }
  }
  return index;
}

KmerIndex build_kmer_index(const std::vector<ProteinRecord>& records, int k) {
  std::vector<CatalogEntry> catalog;
  catalog.reserve(records.size());
  for (const auto& r : records) catalog.push_back({r.id, r.seq, r.is_enzyme, r.ecs});
  return build_kmer_index(std::move(catalog), k);
}

LocalAlignment banded_smith_waterman(std::string_view query, std::string_view target,
                                     long diagonal, long half_width,
                                     const AlignmentScoring& sc) {
  LocalAlignment best;
  const long n = static_cast<long>(query.size());
  const long m = static_cast<long>(target.size());
  if (n == 0 || m == 0 || half_width < 0) return best;
  const long width = 2 * half_width + 1;
  const int open_cost = sc.gap_open + sc.gap_extend;

  // Row i covers target columns j = i + diagonal - half_width + b, b in [0, width).
  std::vector<int> h_prev(static_cast<size_t>(width), 0), h_cur(static_cast<size_t>(width), 0);
  std::vector<int> f_prev(static_cast<size_t>(width), kNegInf), f_cur(static_cast<size_t>(width), kNegInf);
  std::vector<uint8_t> trace(static_cast<size_t>((n + 1) * width), 0);
  long best_i = 0, best_b = 0;

  for (long i = 1; i <= n; ++i) {
    const long j0 = i + diagonal - half_width;
    int e = kNegInf;
    int h_left = 0;  // H[i][j-1]
    for (long b = 0; b < width; ++b) {
      const long j = j0 + b;
      const size_t ub = static_cast<size_t>(b);
      if (j < 1 || j > m) {
        h_cur[ub] = 0;
        f_cur[ub] = kNegInf;
        e = kNegInf;
        h_left = 0;
        continue;
      }
      uint8_t tr = 0;
      // E: horizontal gap (consumes target).
      int e_open = h_left - open_cost;
      int e_ext = e - sc.gap_extend;
      if (e_open >= e_ext) {
        e = e_open;
        tr |= kEOpen;
      } else {
        e = e_ext;
      }
      // F: vertical gap (consumes query); H[i-1][j] sits at b+1 in the previous row.
      int h_up = (b + 1 < width) ? h_prev[ub + 1] : 0;
      int f_up = (b + 1 < width) ? f_prev[ub + 1] : kNegInf;
      int f_open = h_up - open_cost;
      int f_ext = f_up - sc.gap_extend;
      int f;
      if (f_open >= f_ext) {
        f = f_open;
        tr |= kFOpen;
      } else {
        f = f_ext;
      }
      f_cur[ub] = f;
      int s = query[static_cast<size_t>(i - 1)] == target[static_cast<size_t>(j - 1)] ? sc.match : sc.mismatch;
      int diag = h_prev[ub] + s;
      int h = 0;
      uint8_t src = kStop;
      if (diag > h) {
        h = diag;
        src = kDiag;
      }
      if (e > h) {
        h = e;
        src = kFromE;
      }
      if (f > h) {
        h = f;
        src = kFromF;
      }
      h_cur[ub] = h;
      trace[static_cast<size_t>(i * width + b)] = static_cast<uint8_t>(tr | src);
      if (h > best.score) {
        best.score = h;
        best_i = i;
        best_b = b;
      }
      h_left = h;
    }
    std::swap(h_prev, h_cur);
    std::swap(f_prev, f_cur);
  }
  if (best.score == 0) return best;

  // Traceback through the three states.
  long i = best_i, b = best_b;
  int state = 0;  // 0 = H, 1 = E, 2 = F
  best.query_end = static_cast<size_t>(i);
  best.target_end = static_cast<size_t>(i + diagonal - half_width + b);
  while (i > 0) {
    const long j = i + diagonal - half_width + b;
    if (b < 0 || b >= width || j < 1) break;
    uint8_t tr = trace[static_cast<size_t>(i * width + b)];
    if (state == 0) {
      uint8_t src = tr & 3;
      if (src == kStop) break;
      if (src == kDiag) {
        ++best.aligned_len;
        if (query[static_cast<size_t>(i - 1)] == target[static_cast<size_t>(j - 1)]) ++best.matches;
        best.query_begin = static_cast<size_t>(i - 1);
        best.target_begin = static_cast<size_t>(j - 1);
        --i;  // same b in the previous row
        continue;
      }
      state = src == kFromE ? 1 : 2;
      continue;
    }
    ++best.aligned_len;
    if (state == 1) {
      best.target_begin = static_cast<size_t>(j - 1);
      state = (tr & kEOpen) ? 0 : 1;
      --b;  // H/E[i][j-1]
    } else {
      best.query_begin = static_cast<size_t>(i - 1);
      state = (tr & kFOpen) ? 0 : 2;
      --i;
      ++b;  // H/F[i-1][j]
    }
  }
  return best;
}

std::optional<Hit> align_query(const KmerIndex& index, std::string_view query,
                               const AlignParams& params) {
  const size_t k = static_cast<size_t>(index.k());
  if (query.empty() || k == 0 || query.size() < k) return std::nullopt;

  // (entry, diagonal) per seed.
  std::vector<std::pair<uint32_t, long>> seeds;
  for (size_t p = 0; p + k <= query.size(); ++p) {
    const auto* plist = index.postings(query.substr(p, k));
    if (!plist) continue;
    for (const auto& post : *plist) {
      seeds.emplace_back(post.entry, static_cast<long>(post.offset) - static_cast<long>(p));
    }
  }
  if (seeds.empty()) return std::nullopt;
  std::sort(seeds.begin(), seeds.end());

  struct Candidate {
    uint32_t entry;
    size_t seeds;
    long diagonal;
  };
  std::vector<Candidate> cands;
  for (size_t a = 0; a < seeds.size();) {
    size_t b = a;
    size_t best_run = 0;
    long best_diag = 0;
    while (b < seeds.size() && seeds[b].first == seeds[a].first) {
      size_t c = b;
      while (c < seeds.size() && seeds[c].first == seeds[a].first && seeds[c].second == seeds[b].second) ++c;
      if (c - b > best_run) {
        best_run = c - b;
        best_diag = seeds[b].second;
      }
      b = c;
    }
    if (b - a >= params.min_seed_hits) cands.push_back({seeds[a].first, b - a, best_diag});
    a = b;
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    return x.seeds != y.seeds ? x.seeds > y.seeds : x.entry < y.entry;
  });
  if (cands.size() > params.max_candidates) cands.resize(params.max_candidates);

  std::optional<Hit> best;
  for (const auto& c : cands) {
    const auto& entry = index.catalog()[c.entry];
    long len_delta = std::labs(static_cast<long>(query.size()) - static_cast<long>(entry.seq.size()));
    auto aln = banded_smith_waterman(query, entry.seq, c.diagonal, 2 * len_delta + 16, params.scoring);
    if (aln.aligned_len == 0) continue;
    Hit hit;
    hit.entry = c.entry;
    hit.id = entry.id;
    hit.identity = aln.identity();
    hit.aligned_len = aln.aligned_len;
    hit.score = aln.score;
    hit.query_coverage = static_cast<double>(aln.query_end - aln.query_begin) /
                         static_cast<double>(query.size());
    bool better = !best || hit.score > best->score ||
                  (hit.score == best->score &&
                   (hit.identity > best->identity ||
                    (hit.identity == best->identity && hit.id < best->id)));
    if (better) {
      hit.is_enzyme = entry.is_enzyme;
      hit.ecs = entry.ecs;
      best = std::move(hit);
    }
  }
  if (!best || best->identity < params.min_identity ||
      best->query_coverage < params.min_query_coverage) {
    return std::nullopt;
  }
  return best;
}

TransferredLabels transfer_labels(const Hit& hit) {
  return {hit.is_enzyme, static_cast<int>(hit.ecs.size()), hit.ecs};
}

std::map<std::string, Hit> read_tabular_hits(std::istream& in, const KmerIndex& index) {
  std::map<std::string, Hit> best;
  std::string line;
  long row = 0;
  auto num = [&](std::string_view s) {
    s = trim(s);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw FormatError("invalid number '" + std::string(s) + "' in tabular hits", row);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 12) throw FormatError("tabular hits need 12 columns", row);
    std::string query(trim(cols[0]));
    std::string subject(trim(cols[1]));
    auto entry = index.find_entry(subject);
    if (!entry) throw FormatError("unknown subject '" + subject + "'", row);
    Hit hit;
    hit.entry = *entry;
    hit.id = subject;
    hit.identity = num(cols[2]) / 100.0;
    hit.aligned_len = static_cast<size_t>(num(cols[3]));
    num(cols[6]);
    num(cols[7]);
    hit.query_coverage = 0.0;  // query length is not part of the format
    hit.score = num(cols[11]);
    const auto& cat = index.catalog()[*entry];
    hit.is_enzyme = cat.is_enzyme;
    hit.ecs = cat.ecs;
    auto it = best.find(query);
    if (it == best.end() || hit.score > it->second.score ||
        (hit.score == it->second.score &&
         (hit.identity > it->second.identity ||
          (hit.identity == it->second.identity && hit.id < it->second.id)))) {
      best[query] = std::move(hit);
    }
  }
  return best;
}

void save_catalog(std::ostream& out, const KmerIndex& index) {
  binio::put_header(out, kMagic, kVersion);
  binio::put<uint32_t>(out, static_cast<uint32_t>(index.k()));
  binio::put<uint64_t>(out, index.catalog().size());
  for (const auto& e : index.catalog()) {
    binio::put_string(out, e.id);
    binio::put_string(out, e.seq);
    binio::put<uint8_t>(out, e.is_enzyme ? 1 : 0);
    binio::put_string(out, format_ec_list(e.ecs));
  }
}

KmerIndex load_catalog(std::istream& in) {
  binio::expect_header(in, kMagic, kVersion);
  int k = static_cast<int>(binio::get<uint32_t>(in));
  auto n = binio::get<uint64_t>(in);
  std::vector<CatalogEntry> catalog;
  catalog.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    CatalogEntry e;
    e.id = binio::get_string(in);
    e.seq = binio::get_string(in);
    e.is_enzyme = binio::get<uint8_t>(in) != 0;
    e.ecs = parse_ec_list(binio::get_string(in));
    catalog.push_back(std::move(e));
  }
  return build_kmer_index(std::move(catalog), k);
}

}  // namespace ecrecer
