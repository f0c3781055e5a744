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

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "ecrecer/bundle.h"
#include "ecrecer/digest.h"
#include "ecrecer/error.h"
#include "ecrecer/fasta.h"
#include "ecrecer/job_service.h"
#include "ecrecer/prediction.h"
#include "test_util.h"

namespace ecrecer {
namespace {

BundleConfig small_config() {
  BundleConfig c;
  c.one_hot_max_len = 64;
  c.agent2.n_estimators = 20;
  c.agent3.ann = {16, 64, Metric::Euclidean};
  c.agent3.ef_search = 64;
  c.agent3.negative_budget = 100;
  c.agent3.shortlist_size = 50;
  return c;
}

const std::vector<ProteinRecord>& corpus() {
  static const auto records = testing::family_corpus(16, 8, 77);
  return records;
}

std::shared_ptr<const ModelBundle> shared_bundle() {
  static const auto bundle = std::make_shared<const ModelBundle>(train_bundle(corpus(), nullptr, small_config()));
  return bundle;
}

std::string fasta_of(const std::vector<ProteinRecord>& records, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end && i < records.size(); ++i) out += ">" + records[i].id + "\n" + records[i].seq + "\n";
  return out;
}

TEST(Bundle, TrainingRecordsReplayTheirOwnLabels) {
  const auto& b = *shared_bundle();
  EXPECT_EQ(b.policy.precedence.front(), PredictionSource::Alignment);
  std::vector<FastaEntry> q;
  for (const auto& r : corpus()) q.push_back({r.id, r.seq});
  auto out = predict_entries(b, q, OutputMode::Prediction);
  EXPECT_TRUE(out.errors.empty());
  std::istringstream in(out.tsv);
  auto preds = read_predictions(in);
  ASSERT_EQ(preds.size(), corpus().size());
  for (size_t i = 0; i < preds.size(); ++i) {
    EXPECT_EQ(preds[i].is_enzyme, corpus()[i].is_enzyme) << preds[i].id;
    EXPECT_EQ(preds[i].ecs(), corpus()[i].ecs) << preds[i].id;
  }
}

TEST(Bundle, EmptyInputGivesHeaderOnly) {
  auto out = predict_entries(*shared_bundle(), {}, OutputMode::Prediction);
  std::istringstream in(out.tsv);
  EXPECT_TRUE(read_predictions(in).empty());
  EXPECT_EQ(std::count(out.tsv.begin(), out.tsv.end(), '\n'), 1);
}

TEST(Bundle, RecommendationAtMostTwenty) {
  std::mt19937_64 rng(3);
  std::vector<FastaEntry> q;
  for (int i = 0; i < 20; ++i) q.push_back({"N" + std::to_string(i), testing::random_protein(rng, 90)});
  auto out = predict_entries(*shared_bundle(), q, OutputMode::Recommendation);
  std::istringstream in(out.tsv);
  for (const auto& p : read_predictions(in)) {
    EXPECT_LE(p.ranked_ecs.size(), kRecommendationSize);
    for (size_t i = 1; i < p.ranked_ecs.size(); ++i) EXPECT_GE(p.ranked_ecs[i - 1].score, p.ranked_ecs[i].score);
  }
}

TEST(Bundle, SaveLoadPreservesOutputAndDetectsTampering) {
  testing::TempDir dir;
  save_bundle(dir / "b", *shared_bundle());
  auto loaded = load_bundle(dir / "b");
  std::mt19937_64 rng(5);
  std::vector<FastaEntry> q;
  for (int i = 0; i < 10; ++i) q.push_back({"R" + std::to_string(i), testing::random_protein(rng, 70)});
  q.push_back({corpus()[3].id, corpus()[3].seq});
  EXPECT_EQ(predict_entries(loaded, q, OutputMode::Recommendation).tsv,
            predict_entries(*shared_bundle(), q, OutputMode::Recommendation).tsv);
  std::string manifest = read_file(dir / "b" / "manifest.json");
  EXPECT_EQ(manifest.find("generated_at"), std::string::npos);
  save_bundle(dir / "c", loaded);
  EXPECT_EQ(read_file(dir / "c" / "manifest.json"), manifest);
  { std::ofstream(dir / "b" / "agent2.bin", std::ios::app) << "x"; }
  EXPECT_THROW(load_bundle(dir / "b"), Error);
}

TEST(Bundle, MissingExternalEmbeddingIsRowError) {
  EmbeddingTable t({EmbeddingTag::Kind::Custom, "ext"}, 4);
  std::mt19937_64 rng(4);
  auto x = testing::uniform_points(corpus().size(), 4, rng);
  for (size_t i = 0; i < corpus().size(); ++i) t.add(corpus()[i].id, x.row(i));
  auto cfg = small_config();
  cfg.tag = t.tag();
  cfg.tune = false;
  auto b = train_bundle(corpus(), &t, cfg);
  std::vector<FastaEntry> q{{corpus()[0].id, corpus()[0].seq}, {"missing", "MKVLAT"}};
  auto out = predict_entries(b, q, OutputMode::Prediction, &t);
  ASSERT_EQ(out.errors.size(), 1u);
  EXPECT_EQ(out.errors[0].first, "missing");
  EXPECT_NE(out.tsv.find("missing\t\t\t\t\terror"), std::string::npos);
}

// -------------------------------------------------------------- job store

TEST(JobStoreTest, TransitionsAreEnforced) {
  testing::TempDir dir;
  JobStore store(dir / "s");
  auto job = store.create(">a\nMKV\n", OutputMode::Prediction);
  EXPECT_EQ(job.id.size(), 32u);
  EXPECT_EQ(job.state, JobState::Pending);
  EXPECT_THROW(store.transition(job, JobState::Done), Error);
  store.transition(job, JobState::Running);
  EXPECT_THROW(store.transition(job, JobState::Done), Error);  // no result yet
  store.write_result(job, "x\n");
  store.transition(job, JobState::Done);
  EXPECT_THROW(store.transition(job, JobState::Running), Error);
  EXPECT_EQ(store.get(job.id)->state, JobState::Done);
  EXPECT_EQ(*store.result(job.id), "x\n");
  EXPECT_FALSE(store.get("../etc").has_value());
  EXPECT_FALSE(store.get(std::string(32, 'f')).has_value());
  for (auto from : {JobState::Pending, JobState::Running, JobState::Done, JobState::Failed}) {
    for (auto to : {JobState::Pending, JobState::Running, JobState::Done, JobState::Failed}) {
      bool want = (from == JobState::Pending && to == JobState::Running) ||
                  (from == JobState::Running && (to == JobState::Done || to == JobState::Failed));
      EXPECT_EQ(legal_transition(from, to), want);
    }
  }
}

TEST(JobStoreTest, JsonRoundTrip) {
  testing::TempDir dir;
  JobStore store(dir / "s");
  auto job = store.create(">a\nMKV\n", OutputMode::Recommendation);
  auto back = Job::from_json(job.to_json());
  EXPECT_EQ(back.id, job.id);
  EXPECT_EQ(back.mode, "recommendation");
  EXPECT_EQ(back.input_digest, job.input_digest);
  EXPECT_EQ(back.history.size(), job.history.size());
}

TEST(JobStoreTest, RecoveryFailsInterruptedJobs) {
  testing::TempDir dir;
  std::string running_id, pending_id;
  {
    JobStore store(dir / "s");
    auto a = store.create(">a\nMKV\n", OutputMode::Prediction);
    store.transition(a, JobState::Running);
    running_id = a.id;
    pending_id = store.create(">b\nMKV\n", OutputMode::Prediction).id;
    std::filesystem::create_directories(dir / "s" / std::string(32, 'a'));  // orphan without job.json
  }
  JobStore store(dir / "s");
  auto pending = store.recover();
  EXPECT_EQ(pending, std::vector<std::string>{pending_id});
  auto interrupted = store.get(running_id);
  ASSERT_TRUE(interrupted.has_value());
  EXPECT_EQ(interrupted->state, JobState::Failed);
  EXPECT_FALSE(interrupted->error.empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "s" / std::string(32, 'a')));
}

// ---------------------------------------------------------------- service

std::vector<JobState> states_of(const Job& job) {
  std::vector<JobState> out;
  for (const auto& e : job.history) out.push_back(e.state);
  return out;
}

TEST(JobServiceTest, LifecycleAndCliParity) {
  testing::TempDir dir;
  JobService svc(shared_bundle(), {dir / "store", 2, std::nullopt});
  std::string fasta = fasta_of(corpus(), 0, 20);
  auto job = svc.submit(fasta, OutputMode::Prediction);
  EXPECT_EQ(job.state, JobState::Pending);
  svc.wait_idle();
  auto done = svc.get(job.id);
  ASSERT_TRUE(done.has_value());
  EXPECT_EQ(done->state, JobState::Done);
  EXPECT_EQ(states_of(*done), (std::vector<JobState>{JobState::Pending, JobState::Running, JobState::Done}));
  EXPECT_EQ(done->queries, 20u);
  auto expected = predict_entries(*shared_bundle(), parse_fasta_text(fasta), OutputMode::Prediction).tsv;
  EXPECT_EQ(*svc.result(job.id), expected);
}

TEST(JobServiceTest, MalformedFastaFailsJob) {
  testing::TempDir dir;
  JobService svc(shared_bundle(), {dir / "store", 1, std::nullopt});
  auto job = svc.submit("this is not fasta\n", OutputMode::Prediction);
  svc.wait_idle();
  auto j = svc.get(job.id);
  EXPECT_EQ(j->state, JobState::Failed);
  EXPECT_FALSE(j->error.empty());
  EXPECT_FALSE(svc.result(job.id).has_value());
}

TEST(JobServiceTest, SixteenConcurrentSubmissions) {
  testing::TempDir dir;
  JobService svc(shared_bundle(), {dir / "store", 4, std::nullopt});
  std::vector<std::string> ids(16);
  std::vector<std::thread> clients;
  for (size_t i = 0; i < 16; ++i) {
    clients.emplace_back([&, i] {
      ids[i] = svc.submit(fasta_of(corpus(), i * 5, i * 5 + 5), i % 2 ? OutputMode::Recommendation : OutputMode::Prediction).id;
    });
  }
  for (auto& t : clients) t.join();
  svc.wait_idle();
  std::set<std::string> unique(ids.begin(), ids.end());
  EXPECT_EQ(unique.size(), 16u);
  for (size_t i = 0; i < 16; ++i) {
    auto j = svc.get(ids[i]);
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ(j->state, JobState::Done);
    auto mode = i % 2 ? OutputMode::Recommendation : OutputMode::Prediction;
    EXPECT_EQ(*svc.result(ids[i]),
              predict_entries(*shared_bundle(), parse_fasta_text(fasta_of(corpus(), i * 5, i * 5 + 5)), mode).tsv);
  }
  EXPECT_EQ(svc.store().list().size(), 16u);
}

TEST(JobServiceTest, ResultSurvivesRestart) {
  testing::TempDir dir;
  std::string id;
  std::string fasta = fasta_of(corpus(), 10, 15);
  {
    JobService svc(shared_bundle(), {dir / "store", 1, std::nullopt});
    id = svc.submit(fasta, OutputMode::Prediction).id;
    svc.wait_idle();
  }
  JobService again(shared_bundle(), {dir / "store", 1, std::nullopt});
  EXPECT_EQ(again.get(id)->state, JobState::Done);
  EXPECT_EQ(*again.result(id), predict_entries(*shared_bundle(), parse_fasta_text(fasta), OutputMode::Prediction).tsv);
}

TEST(JobServiceTest, PendingJobsResumeAfterRestart) {
  testing::TempDir dir;
  std::string id;
  {
    JobStore store(dir / "store");
    id = store.create(fasta_of(corpus(), 0, 3), OutputMode::Prediction).id;
  }
  JobService svc(shared_bundle(), {dir / "store", 1, std::nullopt});
  svc.wait_idle();
  EXPECT_EQ(svc.get(id)->state, JobState::Done);
}

TEST(JobServiceTest, TtlExpiresFinishedJobs) {
  testing::TempDir dir;
  JobService svc(shared_bundle(), {dir / "store", 1, std::chrono::seconds(0)});
  auto id = svc.submit(fasta_of(corpus(), 0, 2), OutputMode::Prediction).id;
  svc.wait_idle();
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  EXPECT_EQ(svc.expire(), 1u);
  EXPECT_FALSE(svc.get(id).has_value());
}

TEST(HttpFrontendTest, SubmitPollFetch) {
  testing::TempDir dir;
  JobService svc(shared_bundle(), {dir / "store", 2, std::nullopt});
  HttpFrontend http(svc);
  int port = http.bind("127.0.0.1", 0);
  std::thread server([&] { http.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30, 0);

  auto health = cli.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  std::string fasta = fasta_of(corpus(), 30, 40);
  auto posted = cli.Post("/jobs?mode=recommendation", fasta, "text/plain");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 202);
  auto id = nlohmann::json::parse(posted->body).at("job_id").get<std::string>();

  httplib::MultipartFormDataItems items{{"fasta", fasta, "q.fasta", "text/plain"}};
  auto multi = cli.Post("/jobs", items);
  ASSERT_TRUE(multi);
  EXPECT_EQ(multi->status, 202);
  auto multi_id = nlohmann::json::parse(multi->body).at("job_id").get<std::string>();

  svc.wait_idle();
  auto state = cli.Get("/jobs/" + id);
  ASSERT_TRUE(state);
  EXPECT_EQ(nlohmann::json::parse(state->body).at("state"), "Done");
  auto result = cli.Get("/jobs/" + id + "/result");
  ASSERT_TRUE(result);
  EXPECT_EQ(result->status, 200);
  EXPECT_EQ(result->body, predict_entries(*shared_bundle(), parse_fasta_text(fasta), OutputMode::Recommendation).tsv);
  auto multi_result = cli.Get("/jobs/" + multi_id + "/result");
  EXPECT_EQ(multi_result->body, predict_entries(*shared_bundle(), parse_fasta_text(fasta), OutputMode::Prediction).tsv);

  EXPECT_EQ(cli.Get("/jobs/" + std::string(32, '0'))->status, 404);
  EXPECT_EQ(cli.Get("/jobs/" + std::string(32, '0') + "/result")->status, 404);
  EXPECT_EQ(cli.Post("/jobs?mode=bogus", fasta, "text/plain")->status, 400);

  http.stop();
  server.join();
}

TEST(HttpFrontendTest, ResultIs404UntilDone) {
  testing::TempDir dir;
  JobStore store(dir / "store");
  auto job = store.create(">a\nMKV\n", OutputMode::Prediction);
  store.transition(job, JobState::Running);
  // A service started on this store marks the interrupted job Failed.
  JobService svc(shared_bundle(), {dir / "store", 1, std::nullopt});
  HttpFrontend http(svc);
  int port = http.bind("127.0.0.1", 0);
  std::thread server([&] { http.listen(); });
  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Get("/jobs/" + job.id + "/result");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  http.stop();
  server.join();
}

TEST(ServiceConfigTest, EnvironmentOverrides) {
  ::setenv("ECRECER_BIND", "0.0.0.0:9911", 1);
  auto [host, port] = resolve_bind_address("127.0.0.1:8080");
  EXPECT_EQ(host, "0.0.0.0");
  EXPECT_EQ(port, 9911);
  ::unsetenv("ECRECER_BIND");
  auto fallback = resolve_bind_address("127.0.0.1:8080");
  EXPECT_EQ(fallback.second, 8080);
  ::setenv("ECRECER_STORE", "/tmp/elsewhere", 1);
  EXPECT_EQ(resolve_store_dir("x"), std::filesystem::path("/tmp/elsewhere"));
  ::unsetenv("ECRECER_STORE");
  EXPECT_EQ(resolve_store_dir("x"), std::filesystem::path("x"));
}

}  // namespace
}  // namespace ecrecer
