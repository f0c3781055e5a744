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

#ifndef ECRECER_BUNDLE_H_
#define ECRECER_BUNDLE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "ecrecer/agents.h"
#include "ecrecer/alignment.h"
#include "ecrecer/embedding.h"
#include "ecrecer/fasta.h"
#include "ecrecer/integrator.h"
#include "ecrecer/protein.h"

namespace ecrecer {

inline constexpr int kBundleFormatVersion = 1;

struct BundleConfig {
  // One-hot bundles embed queries themselves; other tags need a table at
  // prediction time.
  EmbeddingTag tag{EmbeddingTag::Kind::OneHot, {}};
  size_t one_hot_max_len = kDefaultOneHotMaxLen;
  Agent1Params agent1;
  GbdtParams agent2;
  Agent3Params agent3;
  int kmer_k = 5;
  AlignParams align;
  IntegrationPolicy policy;
  // Tune the policy on the latest validation_fraction of the training
  // records, then retrain every component on all of them.
  bool tune = true;
  double validation_fraction = 0.1;
  TuneGrid grid;
  TuneObjective objective = TuneObjective::EcMicroF1;
};

struct TuningSummary {
  bool tuned = false;
  std::string skipped_reason;
  size_t fit_records = 0;
  size_t validation_records = 0;
  double best_score = 0.0;
  std::vector<double> history;
};

struct ModelBundle {
  EmbeddingTag tag;
  size_t dim = 0;
  size_t one_hot_max_len = 0;  // 0 unless tag is one-hot
  Agent1Model agent1;
  Agent2Model agent2;
  Agent3Model agent3;
  KmerIndex catalog;
  AlignParams align;
  IntegrationPolicy policy;
  TuningSummary tuning;
  size_t train_records = 0;
  std::string train_digest;  // over ids, sequences and labels
};

// `table` must hold every training id unless the tag is one-hot, in which
// case it may be null and vectors are computed from the sequences.
ModelBundle train_bundle(const std::vector<ProteinRecord>& train, const EmbeddingTable* table,
                         const BundleConfig& config);

// Directory with manifest.json plus one container per component. The
// manifest records each file's SHA-256 and no timestamps.
void save_bundle(const std::filesystem::path& dir, const ModelBundle& bundle);
// Verifies digests before loading; throws SerializationError on mismatch.
ModelBundle load_bundle(const std::filesystem::path& dir);

// Query vector from the bundle's own one-hot encoder or from `external`.
// Throws InvalidArgument when an external vector is needed and missing.
std::vector<float> embed_query(const ModelBundle& bundle, const std::string& id,
                               const std::string& seq, const EmbeddingTable* external);

QueryEvidence gather_evidence(const ModelBundle& bundle, const std::string& id,
                              const std::string& seq, Row x);

struct PredictOutput {
  std::string tsv;
  // id and message for every query that could not be scored; those rows
  // appear in the TSV with source "error".
  std::vector<std::pair<std::string, std::string>> errors;
};

PredictOutput predict_entries(const ModelBundle& bundle, const std::vector<FastaEntry>& queries,
                              OutputMode mode, const EmbeddingTable* external = nullptr);

std::string_view to_string(OutputMode mode);
OutputMode parse_output_mode(std::string_view s);

}  // namespace ecrecer

#endif  // ECRECER_BUNDLE_H_
