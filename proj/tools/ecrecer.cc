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

// ecrecer: enzyme function annotation command line.

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecrecer/bundle.h"
#include "ecrecer/digest.h"
#include "ecrecer/embedding.h"
#include "ecrecer/error.h"
#include "ecrecer/fasta.h"
#include "ecrecer/flatfile.h"
#include "ecrecer/job_service.h"
#include "ecrecer/metrics.h"
#include "ecrecer/preprocess.h"
#include "ecrecer/split.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ecrecer;

namespace {

// Exit codes: 0 ok, 1 error, 2 some prediction rows failed, 3 below --min-f1.
constexpr int kExitError = 1;
constexpr int kExitRowErrors = 2;
constexpr int kExitGate = 3;

// Run manifest next to the outputs: inputs with digests, parameters and
// software version. No timestamps, so identical runs give identical bytes.
void write_run_manifest(const fs::path& path, const std::string& command,
                        const std::vector<fs::path>& inputs, const json& params,
                        const std::vector<fs::path>& outputs) {
  json in = json::object(), out = json::object();
  for (const auto& p : inputs) in[p.filename().string()] = sha256_file(p);
  for (const auto& p : outputs) {
    if (fs::is_regular_file(p)) out[p.filename().string()] = sha256_file(p);
  }
  json m = {{"command", command}, {"software_version", ECRECER_VERSION},
            {"inputs", in},       {"params", params},
            {"outputs", out}};
  write_file_atomic(path, m.dump(2) + "\n");
}

std::string to_text(void (*fn)(std::ostream&, const std::vector<ProteinRecord>&),
                    const std::vector<ProteinRecord>& r) {
  std::ostringstream s;
  fn(s, r);
  return s.str();
}

std::vector<ProteinRecord> load_clean(const fs::path& path) {
  auto contents = parse_flatfile(path);
  if (!contents.rejects.empty()) {
    std::cerr << "warning: " << contents.rejects.size() << " rows of " << path
              << " rejected (see " << rejects_sidecar_path(path) << ")\n";
    std::ostringstream r;
    write_rejects(r, contents.rejects);
    write_file_atomic(rejects_sidecar_path(path), r.str());
  }
  return std::move(contents.records);
}

Date parse_date_arg(const std::string& s) { return parse_date(s); }

struct PrepareArgs {
  fs::path input, later, out;
  std::string as_of, later_as_of, task = "ec";
};

int cmd_prepare(const PrepareArgs& a) {
  fs::create_directories(a.out);
  auto raw = parse_flatfile(a.input);
  std::vector<fs::path> outputs;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file_atomic(a.out / name, text);
    outputs.push_back(a.out / name);
  };
  {
    std::ostringstream r;
    write_rejects(r, raw.rejects);
    emit("rejects.tsv", r.str());
  }
  auto prep = preprocess(std::move(raw.records));
  {
    std::ostringstream r;
    write_preprocess_report(r, prep.report);
    emit("preprocess_report.tsv", r.str());
  }
  emit("clean.tsv", to_text(write_flatfile, prep.clean));
  {
    std::ostringstream d;
    prep.dictionary.write_tsv(d);
    emit("dictionary.tsv", d.str());
  }
  std::vector<fs::path> inputs{a.input};
  json params = {{"task", a.task}};
  if (!a.later.empty()) {
    if (a.as_of.empty() || a.later_as_of.empty()) {
      throw InvalidArgument("--later needs --as-of and --later-as-of");
    }
    inputs.push_back(a.later);
    auto later_raw = parse_flatfile(a.later);
    auto later_prep = preprocess(std::move(later_raw.records));
    Snapshot s1{a.as_of, parse_date_arg(a.as_of), prep.clean};
    Snapshot s2{a.later_as_of, parse_date_arg(a.later_as_of), later_prep.clean};
    SplitReport rep;
    Task task = parse_task(a.task);
    auto split = chronological_split(s1, s2, task, &rep);
    emit("train.tsv", to_text(write_flatfile, split.train));
    emit("test.tsv", to_text(write_flatfile, split.test));
    std::string fasta;
    for (const auto& r : split.test) fasta += ">" + r.id + "\n" + r.seq + "\n";
    emit("test.fasta", fasta);
    std::ostringstream r;
    r << "metric\tvalue\n"
      << "train\t" << split.train.size() << "\n"
      << "test\t" << split.test.size() << "\n"
      << "train_after_cutoff\t" << rep.train_after_cutoff << "\n"
      << "test_seen_sequence\t" << rep.test_seen_sequence << "\n"
      << "test_before_cutoff\t" << rep.test_before_cutoff << "\n"
      << "non_enzyme_filtered\t" << rep.non_enzyme_filtered << "\n";
    emit("split_report.tsv", r.str());
    std::ostringstream d;
    write_snapshot_diff(d, snapshot_diff(s1, s2));
    emit("snapshot_diff.tsv", d.str());
    params["as_of"] = a.as_of;
    params["later_as_of"] = a.later_as_of;
  }
  write_run_manifest(a.out / "run_manifest.json", "prepare", inputs, params, outputs);
  std::cout << "clean records: " << prep.report.clean << " (" << prep.report.enzymes
            << " enzymes, " << prep.report.distinct_ecs << " ECs)\n";
  return 0;
}

struct EmbedArgs {
  fs::path input, out;
  bool one_hot = false;
  size_t max_len = kDefaultOneHotMaxLen;
};

int cmd_embed(const EmbedArgs& a) {
  if (!a.one_hot) {
    throw InvalidArgument(
        "only --one-hot is computed here; deep embeddings are produced offline as tables");
  }
  if (a.max_len == 0) throw InvalidArgument("--max-len must be at least 1");
  std::vector<FastaEntry> entries;
  auto ext = a.input.extension().string();
  if (ext == ".fasta" || ext == ".fa" || ext == ".faa") {
    entries = parse_fasta(a.input);
  } else {
    for (auto& r : load_clean(a.input)) entries.push_back({r.id, r.seq});
  }
  EmbeddingTable table({EmbeddingTag::Kind::OneHot, {}}, 25 * a.max_len);
  std::vector<float> v(25 * a.max_len);
  for (const auto& e : entries) {
    one_hot_encode_into(e.seq, a.max_len, v);
    table.add(e.id, v);
  }
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  save_embedding_table(a.out, table);
  write_run_manifest(a.out.string() + ".manifest.json", "embed", {a.input},
                     {{"one_hot", true}, {"max_len", a.max_len}}, {a.out});
  std::cout << "embedded " << table.size() << " sequences, dim " << table.dim() << "\n";
  return 0;
}

struct TrainArgs {
  fs::path train, embeddings, out;
  size_t one_hot_max_len = kDefaultOneHotMaxLen;
  bool no_tune = false;
  double validation_fraction = 0.1;
  int threads = 1;
  uint64_t seed = 0;
  int kmer_k = 5;
};

int cmd_train(const TrainArgs& a) {
  auto records = load_clean(a.train);
  BundleConfig cfg;
  cfg.tune = !a.no_tune;
  cfg.validation_fraction = a.validation_fraction;
  cfg.agent3.threads = a.threads;
  cfg.agent1.seed = a.seed;
  cfg.agent2.seed = a.seed;
  cfg.agent3.seed = a.seed;
  cfg.kmer_k = a.kmer_k;
  std::optional<EmbeddingTable> table;
  std::vector<fs::path> inputs{a.train};
  if (!a.embeddings.empty()) {
    table = load_embedding_table(a.embeddings);
    cfg.tag = table->tag();
    if (cfg.tag.kind == EmbeddingTag::Kind::OneHot) {
      if (table->dim() % 25 != 0) throw InvalidArgument("one-hot table width not a multiple of 25");
      cfg.one_hot_max_len = table->dim() / 25;
    }
    inputs.push_back(a.embeddings);
  } else {
    cfg.one_hot_max_len = a.one_hot_max_len;
  }
  auto bundle = train_bundle(records, table ? &*table : nullptr, cfg);
  save_bundle(a.out, bundle);
  write_run_manifest(a.out / "run_manifest.json", "train", inputs,
                     {{"tune", cfg.tune},
                      {"validation_fraction", cfg.validation_fraction},
                      {"seed", a.seed},
                      {"kmer_k", a.kmer_k},
                      {"policy", bundle.policy.describe()}},
                     {a.out / "manifest.json"});
  std::cout << "bundle written to " << a.out << "\n"
            << "policy: " << bundle.policy.describe() << "\n";
  if (!bundle.tuning.tuned && cfg.tune) {
    std::cerr << "warning: tuning skipped: " << bundle.tuning.skipped_reason << "\n";
  }
  return 0;
}

struct PredictArgs {
  fs::path bundle, fasta, out, embeddings;
  std::string mode = "prediction";
};

int cmd_predict(const PredictArgs& a) {
  auto bundle = load_bundle(a.bundle);
  auto entries = parse_fasta(a.fasta);
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = load_embedding_table(a.embeddings, bundle.dim);
  auto out = predict_entries(bundle, entries, parse_output_mode(a.mode), table ? &*table : nullptr);
  if (a.out.empty()) {
    std::cout << out.tsv;
  } else {
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    write_file_atomic(a.out, out.tsv);
    std::vector<fs::path> inputs{a.fasta, a.bundle / "manifest.json"};
    if (!a.embeddings.empty()) inputs.push_back(a.embeddings);
    std::vector<fs::path> outputs{a.out};
    fs::path errors_path = a.out.string() + ".errors.tsv";
    if (!out.errors.empty()) {
      std::ostringstream e;
      e << "id\terror\n";
      for (const auto& [id, msg] : out.errors) e << id << '\t' << msg << '\n';
      write_file_atomic(errors_path, e.str());
      outputs.push_back(errors_path);
    } else {
      fs::remove(errors_path);
    }
    write_run_manifest(a.out.string() + ".manifest.json", "predict", inputs,
                       {{"mode", a.mode}}, outputs);
  }
  for (const auto& [id, msg] : out.errors) std::cerr << "error: " << id << ": " << msg << "\n";
  return out.errors.empty() ? 0 : kExitRowErrors;
}

struct EvaluateArgs {
  fs::path predictions, gold, dictionary, counts, report;
  std::string task = "ec";
  double min_f1 = -1.0;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (!a.counts.empty()) {
    std::ifstream in(a.counts);
    if (!in) throw Error("cannot open " + a.counts.string());
    auto rows = read_counts_table(in);
    write_counts_report(std::cout, rows);
    if (a.min_f1 >= 0) {
      for (const auto& r : rows) {
        if (binary_metrics(r.counts).f1.value_or(0.0) < a.min_f1) return kExitGate;
      }
    }
    return 0;
  }
  if (a.predictions.empty() || a.gold.empty()) {
    throw InvalidArgument("evaluate needs --predictions and --gold (or --counts)");
  }
  auto preds = load_external_predictions(a.predictions.string());
  auto gold = load_clean(a.gold);
  std::optional<LabelDictionary> dict;
  if (!a.dictionary.empty()) {
    std::ifstream in(a.dictionary);
    if (!in) throw Error("cannot open " + a.dictionary.string());
    dict = LabelDictionary::read_tsv(in);
  }
  Task task = parse_task(a.task);
  auto rep = evaluate_task(preds, gold, task, dict ? &*dict : nullptr);
  write_report_text(std::cout, rep);
  if (!a.report.empty()) {
    std::ostringstream s, pc;
    write_report_tsv(s, rep);
    write_file_atomic(a.report, s.str());
    std::vector<fs::path> outputs{a.report};
    if (!rep.per_class.empty()) {
      write_per_class_tsv(pc, rep);
      fs::path pc_path = a.report.string() + ".per_class.tsv";
      write_file_atomic(pc_path, pc.str());
      outputs.push_back(pc_path);
    }
    std::vector<fs::path> inputs{a.predictions, a.gold};
    if (!a.dictionary.empty()) inputs.push_back(a.dictionary);
    write_run_manifest(a.report.string() + ".manifest.json", "evaluate", inputs,
                       {{"task", a.task}}, outputs);
  }
  if (a.min_f1 >= 0) {
    double f1 = task == Task::EnzymeOrNot ? rep.binary_metrics.f1.value_or(0.0)
                : task == Task::ECNumber  ? rep.micro_f1.value_or(0.0)
                                          : (rep.macro ? rep.macro->mf1_perclass : 0.0);
    if (f1 < a.min_f1) {
      std::cerr << "F1 " << format_metric(f1) << " below --min-f1 " << a.min_f1 << "\n";
      return kExitGate;
    }
  }
  return 0;
}

struct TuneArgs {
  fs::path bundle, validation, embeddings, out;
  std::string objective = "ec";
};

int cmd_tune(const TuneArgs& a) {
  auto bundle = load_bundle(a.bundle);
  auto validation = load_clean(a.validation);
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = load_embedding_table(a.embeddings, bundle.dim);
  std::vector<QueryEvidence> evidence;
  for (const auto& r : validation) {
    auto x = embed_query(bundle, r.id, r.seq, table ? &*table : nullptr);
    evidence.push_back(gather_evidence(bundle, r.id, r.seq, x));
  }
  TuneObjective objective;
  if (a.objective == "ec") {
    objective = TuneObjective::EcMicroF1;
  } else if (a.objective == "enzyme") {
    objective = TuneObjective::EnzymeF1;
  } else {
    throw InvalidArgument("--objective must be ec or enzyme");
  }
  TuneGrid grid;
  grid.use_count_hint = bundle.policy.use_count_hint;
  auto res = greedy_tune(evidence, validation, grid, objective, &bundle.agent3.dictionary);
  std::cout << "grid points: " << res.scoreboard.size() << "\n";
  for (const auto& s : res.scoreboard) {
    std::cout << format_metric(s.score) << '\t' << s.policy.describe() << '\n';
  }
  std::cout << "best: " << format_metric(res.best_score) << '\t' << res.best.describe() << '\n';
  fs::path out = a.out.empty() ? a.bundle : a.out;
  bundle.policy = res.best;
  bundle.tuning.tuned = true;
  bundle.tuning.skipped_reason.clear();
  bundle.tuning.fit_records = bundle.train_records;
  bundle.tuning.validation_records = validation.size();
  bundle.tuning.best_score = res.best_score;
  bundle.tuning.history = res.history;
  save_bundle(out, bundle);
  std::vector<fs::path> inputs{a.validation};
  if (!a.embeddings.empty()) inputs.push_back(a.embeddings);
  write_run_manifest(out / "tune_manifest.json", "tune", inputs,
                     {{"objective", a.objective}, {"policy", res.best.describe()}},
                     {out / "manifest.json"});
  return 0;
}

struct ServeArgs {
  fs::path bundle, store = "ecrecer-store";
  std::string bind = "127.0.0.1:8080";
  size_t workers = 0;
  long ttl_seconds = 0;
};

HttpFrontend* g_frontend = nullptr;

int cmd_serve(const ServeArgs& a) {
  auto bundle = std::make_shared<const ModelBundle>(load_bundle(a.bundle));
  ServiceConfig cfg;
  cfg.store_dir = resolve_store_dir(a.store);
  cfg.workers = a.workers;
  if (a.ttl_seconds > 0) cfg.result_ttl = std::chrono::seconds(a.ttl_seconds);
  JobService service(bundle, cfg);
  HttpFrontend http(service);
  auto [host, port] = resolve_bind_address(a.bind);
  int bound = http.bind(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;
  g_frontend = &http;
  std::signal(SIGINT, [](int) {
    if (g_frontend) g_frontend->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_frontend) g_frontend->stop();
  });
  http.listen();
  g_frontend = nullptr;
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enzyme EC number annotation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ECRECER_VERSION);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Clean a protein extraction and optionally split it");
  p->add_option("--input", prep.input, "Protein TSV (plain or gzip)")->required()->check(CLI::ExistingFile);
  p->add_option("--later", prep.later, "Later snapshot for a chronological split")->check(CLI::ExistingFile);
  p->add_option("--as-of", prep.as_of, "Cutoff date of --input (YYYY-MM[-DD])");
  p->add_option("--later-as-of", prep.later_as_of, "Cutoff date of --later");
  p->add_option("--task", prep.task, "enzyme | function-count | ec");
  p->add_option("--out", prep.out, "Output directory")->required();

  EmbedArgs emb;
  auto* e = app.add_subcommand("embed", "Compute one-hot embeddings");
  e->add_option("--input", emb.input, "FASTA or protein TSV")->required()->check(CLI::ExistingFile);
  e->add_flag("--one-hot", emb.one_hot, "One-hot encode sequences");
  e->add_option("--max-len", emb.max_len, "Residues encoded per sequence");
  e->add_option("--out", emb.out, "Table path (.tsv or binary)")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model bundle");
  t->add_option("--train", tr.train, "Training protein TSV")->required()->check(CLI::ExistingFile);
  t->add_option("--embeddings", tr.embeddings, "Embedding table; one-hot when omitted")->check(CLI::ExistingFile);
  t->add_option("--max-len", tr.one_hot_max_len, "One-hot length when no table is given");
  t->add_flag("--no-tune", tr.no_tune, "Keep the default integration policy");
  t->add_option("--validation-fraction", tr.validation_fraction, "Latest share held out for tuning");
  t->add_option("--threads", tr.threads, "Threads for per-label training");
  t->add_option("--seed", tr.seed, "Random seed");
  t->add_option("--kmer", tr.kmer_k, "Alignment seed length (3..7)");
  t->add_option("--out", tr.out, "Bundle directory")->required();

  PredictArgs pr;
  auto* d = app.add_subcommand("predict", "Annotate FASTA sequences");
  d->add_option("--bundle", pr.bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  d->add_option("--fasta", pr.fasta, "Query FASTA")->required()->check(CLI::ExistingFile);
  d->add_option("--mode", pr.mode, "prediction | recommendation");
  d->add_option("--embeddings", pr.embeddings, "Query embedding table")->check(CLI::ExistingFile);
  d->add_option("--out", pr.out, "Output TSV (stdout when omitted)");

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Score predictions against gold labels");
  v->add_option("--predictions", ev.predictions, "Prediction TSV or external 3-column file")->check(CLI::ExistingFile);
  v->add_option("--gold", ev.gold, "Gold protein TSV")->check(CLI::ExistingFile);
  v->add_option("--task", ev.task, "enzyme | function-count | ec");
  v->add_option("--dictionary", ev.dictionary, "Training label dictionary for unseen-EC exclusion")->check(CLI::ExistingFile);
  v->add_option("--counts", ev.counts, "Confusion counts table (tool tp fp tn fn up un)")->check(CLI::ExistingFile);
  v->add_option("--report", ev.report, "Write the summary TSV here");
  v->add_option("--min-f1", ev.min_f1, "Exit 3 when F1 falls below this");

  TuneArgs tu;
  auto* u = app.add_subcommand("tune", "Re-tune a bundle's integration policy");
  u->add_option("--bundle", tu.bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  u->add_option("--validation", tu.validation, "Validation protein TSV")->required()->check(CLI::ExistingFile);
  u->add_option("--embeddings", tu.embeddings, "Validation embedding table")->check(CLI::ExistingFile);
  u->add_option("--objective", tu.objective, "ec | enzyme");
  u->add_option("--out", tu.out, "Write the tuned bundle here instead of in place");

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "Run the HTTP job service");
  s->add_option("--bundle", sv.bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--bind", sv.bind, "host:port (ECRECER_BIND overrides)");
  s->add_option("--store", sv.store, "Job store directory (ECRECER_STORE overrides)");
  s->add_option("--workers", sv.workers, "Worker threads, 0 = CPU count");
  s->add_option("--ttl", sv.ttl_seconds, "Seconds to keep finished jobs, 0 = forever");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*p) return cmd_prepare(prep);
    if (*e) return cmd_embed(emb);
    if (*t) return cmd_train(tr);
    if (*d) return cmd_predict(pr);
    if (*v) return cmd_evaluate(ev);
    if (*u) return cmd_tune(tu);
    if (*s) return cmd_serve(sv);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
