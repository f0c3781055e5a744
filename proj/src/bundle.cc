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

#include "ecrecer/bundle.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ecrecer/digest.h"
#include "ecrecer/error.h"
#include "ecrecer/split.h"

namespace ecrecer {
namespace {

using nlohmann::json;

constexpr const char* kManifest = "manifest.json";
constexpr const char* kFiles[] = {"agent1.bin", "agent2.bin", "agent3.bin", "catalog.bin",
                                  "dictionary.tsv"};

json hnsw_json(const HnswParams& p) {
  return {{"m", p.m}, {"ef_construction", p.ef_construction},
          {"metric", std::string(to_string(p.metric))}};
}

json gbdt_json(const GbdtParams& p) {
  return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
          {"min_child_weight", p.min_child_weight}, {"subsample", p.subsample},
          {"lambda", p.lambda}, {"learning_rate", p.learning_rate}, {"seed", p.seed}};
}

json policy_json(const IntegrationPolicy& p) {
  json order = json::array();
  for (auto s : p.precedence) order.push_back(std::string(to_string(s)));
  return {{"alignment_min_identity", p.alignment_min_identity},
          {"precedence", order},
          {"agent1_threshold", p.agent1_threshold},
          {"use_count_hint", p.use_count_hint}};
}

IntegrationPolicy policy_from(const json& j) {
  IntegrationPolicy p;
  p.alignment_min_identity = j.at("alignment_min_identity").get<double>();
  p.precedence.clear();
  for (const auto& s : j.at("precedence")) {
    p.precedence.push_back(parse_prediction_source(s.get<std::string>()));
  }
  p.agent1_threshold = j.at("agent1_threshold").get<double>();
  p.use_count_hint = j.at("use_count_hint").get<bool>();
  p.validate();
  return p;
}

json align_json(const AlignParams& p) {
  return {{"min_identity", p.min_identity},
          {"min_seed_hits", p.min_seed_hits},
          {"max_candidates", p.max_candidates},
          {"min_query_coverage", p.min_query_coverage},
          {"match", p.scoring.match},
          {"mismatch", p.scoring.mismatch},
          {"gap_open", p.scoring.gap_open},
          {"gap_extend", p.scoring.gap_extend}};
}

AlignParams align_from(const json& j) {
  AlignParams p;
  p.min_identity = j.at("min_identity").get<double>();
  p.min_seed_hits = j.at("min_seed_hits").get<size_t>();
  p.max_candidates = j.at("max_candidates").get<size_t>();
  p.min_query_coverage = j.at("min_query_coverage").get<double>();
  p.scoring.match = j.at("match").get<int>();
  p.scoring.mismatch = j.at("mismatch").get<int>();
  p.scoring.gap_open = j.at("gap_open").get<int>();
  p.scoring.gap_extend = j.at("gap_extend").get<int>();
  return p;
}

std::string records_digest(const std::vector<ProteinRecord>& records) {
  std::string buf;
  for (const auto& r : records) {
    buf += r.id;
    buf += '\t';
    buf += r.seq;
    buf += '\t';
    buf += r.is_enzyme ? '1' : '0';
    buf += '\t';
    buf += format_ec_list(r.ecs);
    buf += '\n';
  }
  return sha256_hex(buf);
}

EmbeddingTable one_hot_table(const std::vector<ProteinRecord>& records, size_t max_len) {
  EmbeddingTable t({EmbeddingTag::Kind::OneHot, {}}, 25 * max_len);
  std::vector<float> v(25 * max_len);
  for (const auto& r : records) {
    one_hot_encode_into(r.seq, max_len, v);
    t.add(r.id, v);
  }
  return t;
}

struct Components {
  Agent1Model agent1;
  Agent2Model agent2;
  Agent3Model agent3;
  KmerIndex catalog;
};

Components train_components(const std::vector<ProteinRecord>& records, const EmbeddingTable& table,
                            const BundleConfig& config) {
  std::vector<ProteinRecord> enzymes;
  for (const auto& r : records) {
    if (r.is_enzyme) enzymes.push_back(r);
  }
  if (enzymes.empty()) throw InvalidArgument("training data has no enzymes");
  Components c;
  c.agent1 = train_agent1(records, table, config.agent1);
  c.agent2 = train_agent2(enzymes, table, config.agent2);
  c.agent3 = train_agent3(enzymes, table, config.agent3);
  c.catalog = build_kmer_index(records, config.kmer_k);
  return c;
}

QueryEvidence evidence_from(const Components& c, const AlignParams& align, const std::string& id,
                            const std::string& seq, Row x) {
  QueryEvidence ev;
  ev.id = id;
  ev.ag1 = predict_agent1(c.agent1, x);
  ev.ag2 = predict_agent2(c.agent2, x);
  ev.ag3 = predict_agent3(c.agent3, x, OutputMode::Recommendation);
  ev.hit = align_query(c.catalog, seq, align);
  return ev;
}

template <typename Save, typename Model>
std::string to_bytes(Save save, const Model& m) {
  std::ostringstream out(std::ios::binary);
  save(out, m);
  return out.str();
}

template <typename Load>
auto from_bytes(Load load, const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  auto m = load(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw SerializationError("trailing bytes after container");
  }
  return m;
}

}  // namespace

std::string_view to_string(OutputMode mode) {
  return mode == OutputMode::Prediction ? "prediction" : "recommendation";
}

OutputMode parse_output_mode(std::string_view s) {
  if (s == "prediction") return OutputMode::Prediction;
  if (s == "recommendation") return OutputMode::Recommendation;
  throw InvalidArgument("unknown mode '" + std::string(s) + "' (prediction|recommendation)");
}

ModelBundle train_bundle(const std::vector<ProteinRecord>& train, const EmbeddingTable* table,
                         const BundleConfig& config) {
  if (train.empty()) throw InvalidArgument("no training records");
  config.policy.validate();
  const bool one_hot = config.tag.kind == EmbeddingTag::Kind::OneHot;
  std::optional<EmbeddingTable> own;
  if (!table) {
    if (!one_hot) throw InvalidArgument("an embedding table is required for tag " +
                                        config.tag.to_string());
    own = one_hot_table(train, config.one_hot_max_len);
    table = &*own;
  } else if (!(table->tag() == config.tag)) {
    throw InvalidArgument("embedding table tag " + table->tag().to_string() +
                          " differs from the configured " + config.tag.to_string());
  }

  ModelBundle b;
  b.tag = config.tag;
  b.dim = table->dim();
  b.one_hot_max_len = one_hot ? config.one_hot_max_len : 0;
  b.align = config.align;
  b.policy = config.policy;
  b.train_records = train.size();
  b.train_digest = records_digest(train);

  if (config.tune) {
    auto [fit, validation] = validation_holdout(train, config.validation_fraction);
    b.tuning.fit_records = fit.size();
    b.tuning.validation_records = validation.size();
    std::optional<Components> c;
    if (validation.empty()) {
      b.tuning.skipped_reason = "validation part is empty";
    } else {
      try {
        c = train_components(fit, *table, config);
      } catch (const InvalidArgument& e) {
        b.tuning.skipped_reason = std::string("fit part cannot train the agents: ") + e.what();
      }
    }
    if (c) {
      std::vector<QueryEvidence> evidence;
      evidence.reserve(validation.size());
      for (const auto& r : validation) {
        evidence.push_back(evidence_from(*c, config.align, r.id, r.seq, table->at(r.id)));
      }
      TuneGrid grid = config.grid;
      grid.use_count_hint = config.policy.use_count_hint;
      auto result = greedy_tune(evidence, validation, grid, config.objective,
                                &c->agent3.dictionary);
      b.policy = result.best;
      b.tuning.tuned = true;
      b.tuning.best_score = result.best_score;
      b.tuning.history = result.history;
    }
  }

  auto c = train_components(train, *table, config);
  b.agent1 = std::move(c.agent1);
  b.agent2 = std::move(c.agent2);
  b.agent3 = std::move(c.agent3);
  b.catalog = std::move(c.catalog);
  return b;
}

void save_bundle(const std::filesystem::path& dir, const ModelBundle& b) {
  std::filesystem::create_directories(dir);
  std::ostringstream dict;
  b.agent3.dictionary.write_tsv(dict);
  const std::string bytes[] = {
      to_bytes(save_agent1, b.agent1), to_bytes(save_agent2, b.agent2),
      to_bytes(save_agent3, b.agent3), to_bytes(save_catalog, b.catalog), dict.str()};

  json files = json::object();
  for (size_t i = 0; i < std::size(kFiles); ++i) {
    write_file_atomic(dir / kFiles[i], bytes[i]);
    files[kFiles[i]] = sha256_hex(bytes[i]);
  }
  json tuning = {{"tuned", b.tuning.tuned},
                 {"fit_records", b.tuning.fit_records},
                 {"validation_records", b.tuning.validation_records},
                 {"best_score", b.tuning.best_score},
                 {"history", b.tuning.history}};
  if (!b.tuning.skipped_reason.empty()) tuning["skipped_reason"] = b.tuning.skipped_reason;
  const auto& a1 = b.agent1.params;
  const auto& a3 = b.agent3.params;
  json manifest = {
      {"format", "ecrecer-bundle"},
      {"format_version", kBundleFormatVersion},
      {"software_version", ECRECER_VERSION},
      {"embedding", {{"tag", b.tag.to_string()}, {"dim", b.dim},
                     {"one_hot_max_len", b.one_hot_max_len}}},
      {"policy", policy_json(b.policy)},
      {"align", align_json(b.align)},
      {"kmer_k", b.catalog.k()},
      {"params",
       {{"agent1", {{"n_neighbors", a1.n_neighbors},
                    {"metric", std::string(to_string(a1.metric))},
                    {"exact_scan_limit", a1.exact_scan_limit},
                    {"ann", hnsw_json(a1.ann)},
                    {"ef_search", a1.ef_search},
                    {"seed", a1.seed}}},
        {"agent2", gbdt_json(b.agent2.sp.params)},
        {"agent3", {{"ann", hnsw_json(a3.ann)},
                    {"ef_search", a3.ef_search},
                    {"negative_budget", a3.negative_budget},
                    {"shortlist_size", a3.shortlist_size},
                    {"svm_c", a3.svm.c},
                    {"svm_max_iter", a3.svm.max_iter},
                    {"svm_tol", a3.svm.tol},
                    {"sparsify_threshold", a3.sparsify_threshold},
                    {"seed", a3.seed}}}}},
      {"training", {{"records", b.train_records},
                    {"digest", b.train_digest},
                    {"labels", b.agent3.dictionary.size()},
                    {"tuning", tuning}}},
      {"files", files}};
  write_file_atomic(dir / kManifest, manifest.dump(2) + "\n");
}

ModelBundle load_bundle(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifest));
  } catch (const json::exception& e) {
    throw SerializationError("bad bundle manifest: " + std::string(e.what()));
  }
  try {
    if (manifest.at("format") != "ecrecer-bundle") throw SerializationError("not a model bundle");
    if (manifest.at("format_version").get<int>() != kBundleFormatVersion) {
      throw SerializationError("unsupported bundle version");
    }
    std::string bytes[std::size(kFiles)];
    for (size_t i = 0; i < std::size(kFiles); ++i) {
      bytes[i] = read_file(dir / kFiles[i]);
      if (sha256_hex(bytes[i]) != manifest.at("files").at(kFiles[i]).get<std::string>()) {
        throw SerializationError(std::string("digest mismatch for ") + kFiles[i]);
      }
    }
    ModelBundle b;
    const auto& emb = manifest.at("embedding");
    b.tag = EmbeddingTag::parse(emb.at("tag").get<std::string>());
    b.dim = emb.at("dim").get<size_t>();
    b.one_hot_max_len = emb.at("one_hot_max_len").get<size_t>();
    b.policy = policy_from(manifest.at("policy"));
    b.align = align_from(manifest.at("align"));
    b.agent1 = from_bytes(load_agent1, bytes[0]);
    b.agent2 = from_bytes(load_agent2, bytes[1]);
    b.agent3 = from_bytes(load_agent3, bytes[2]);
    b.catalog = from_bytes(load_catalog, bytes[3]);
    const auto& training = manifest.at("training");
    b.train_records = training.at("records").get<size_t>();
    b.train_digest = training.at("digest").get<std::string>();
    const auto& tuning = training.at("tuning");
    b.tuning.tuned = tuning.at("tuned").get<bool>();
    b.tuning.fit_records = tuning.at("fit_records").get<size_t>();
    b.tuning.validation_records = tuning.at("validation_records").get<size_t>();
    b.tuning.best_score = tuning.at("best_score").get<double>();
    b.tuning.history = tuning.at("history").get<std::vector<double>>();
    b.tuning.skipped_reason = tuning.value("skipped_reason", "");
    if (b.agent1.dim() != b.dim || b.agent2.dim() != b.dim || b.agent3.dim() != b.dim) {
      throw SerializationError("bundle components disagree on the embedding dimension");
    }
    if (b.tag.kind == EmbeddingTag::Kind::OneHot && b.dim != 25 * b.one_hot_max_len) {
      throw SerializationError("one-hot bundle dimension does not match its max length");
    }
    return b;
  } catch (const json::exception& e) {
    throw SerializationError("bad bundle manifest: " + std::string(e.what()));
  }
}

std::vector<float> embed_query(const ModelBundle& b, const std::string& id,
                               const std::string& seq, const EmbeddingTable* external) {
  if (external) {
    auto row = external->find(id);
    if (!row) throw InvalidArgument("no embedding for id " + id);
    if (row->size() != b.dim) {
      throw InvalidArgument("embedding for " + id + " has dimension " +
                            std::to_string(row->size()) + ", bundle expects " +
                            std::to_string(b.dim));
    }
    return {row->begin(), row->end()};
  }
  if (b.tag.kind != EmbeddingTag::Kind::OneHot) {
    throw InvalidArgument("bundle uses " + b.tag.to_string() +
                          " embeddings; supply a table with the query vectors");
  }
  return one_hot_encode(seq, b.one_hot_max_len);
}

QueryEvidence gather_evidence(const ModelBundle& b, const std::string& id,
                              const std::string& seq, Row x) {
  QueryEvidence ev;
  ev.id = id;
  ev.ag1 = predict_agent1(b.agent1, x);
  ev.ag2 = predict_agent2(b.agent2, x);
  ev.ag3 = predict_agent3(b.agent3, x, OutputMode::Recommendation);
  ev.hit = align_query(b.catalog, seq, b.align);
  return ev;
}

PredictOutput predict_entries(const ModelBundle& b, const std::vector<FastaEntry>& queries,
                              OutputMode mode, const EmbeddingTable* external) {
  PredictOutput out;
  std::ostringstream tsv;
  write_prediction_header(tsv);
  for (const auto& q : queries) {
    try {
      auto x = embed_query(b, q.id, q.seq, external);
      auto ev = gather_evidence(b, q.id, q.seq, x);
      write_prediction_row(tsv, integrate(ev, b.policy, mode));
    } catch (const Error& e) {
      out.errors.emplace_back(q.id, e.what());
      tsv << q.id << "\t\t\t\t\terror\n";
    }
  }
  out.tsv = tsv.str();
  return out;
}

}  // namespace ecrecer
