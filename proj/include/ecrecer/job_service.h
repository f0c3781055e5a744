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

#ifndef ECRECER_JOB_SERVICE_H_
#define ECRECER_JOB_SERVICE_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ecrecer/bundle.h"

namespace ecrecer {

enum class JobState { Pending, Running, Done, Failed };

std::string_view to_string(JobState s);
JobState parse_job_state(std::string_view s);
// Pending -> Running -> {Done, Failed}.
bool legal_transition(JobState from, JobState to);

struct JobEvent {
  JobState state = JobState::Pending;
  std::string at;  // UTC, ISO 8601
};

struct Job {
  std::string id;  // 128-bit random token, hex
  JobState state = JobState::Pending;
  std::string mode = "prediction";
  std::string submitted_at;
  std::string finished_at;
  int64_t finished_epoch = 0;  // seconds, for retention
  std::string input_digest;    // SHA-256 of the submitted FASTA
  std::string result_path;     // relative to the job directory
  std::string error;
  size_t queries = 0;
  size_t row_errors = 0;
  std::vector<JobEvent> history;

  std::string to_json() const;
  static Job from_json(const std::string& text);
};

// One directory per job holding job.json (rewritten atomically on every
// change), input.fasta and, once Done, result.tsv.
class JobStore {
 public:
  explicit JobStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  Job create(const std::string& fasta, OutputMode mode);
  std::optional<Job> get(const std::string& id) const;
  std::string input(const std::string& id) const;
  std::optional<std::string> result(const std::string& id) const;
  // Checks the transition; a Done job must carry its result.
  void transition(Job& job, JobState to, const std::string& error = {});
  void write_result(Job& job, const std::string& tsv);
  std::vector<Job> list() const;
  void remove(const std::string& id);

  // Restart recovery: Running jobs become Failed, Pending ids are returned
  // (submission order) for re-queueing, half-written job directories go away.
  std::vector<std::string> recover();

 private:
  std::filesystem::path dir(const std::string& id) const;
  void save(const Job& job);

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

struct ServiceConfig {
  std::filesystem::path store_dir = "ecrecer-store";
  size_t workers = 0;  // 0 = hardware concurrency
  std::optional<std::chrono::seconds> result_ttl;  // unset = keep forever
};

// Bounded worker pool draining a FIFO of job ids over a shared read-only
// bundle.
class JobService {
 public:
  JobService(std::shared_ptr<const ModelBundle> bundle, ServiceConfig config);
  ~JobService();

  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  Job submit(const std::string& fasta, OutputMode mode);
  std::optional<Job> get(const std::string& id) const { return store_.get(id); }
  std::optional<std::string> result(const std::string& id) const;
  // Drops finished jobs older than the TTL; returns how many went.
  size_t expire();
  // Blocks until the queue is empty and no job runs.
  void wait_idle();
  void stop();

  JobStore& store() { return store_; }

 private:
  void worker();
  void run(const std::string& id);

  std::shared_ptr<const ModelBundle> bundle_;
  ServiceConfig config_;
  JobStore store_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// HTTP front end:
//   POST /jobs               FASTA body or multipart field "fasta"; ?mode=
//   GET  /jobs/{id}          job record as JSON
//   GET  /jobs/{id}/result   TSV, 404 until Done
//   GET  /healthz
class HttpFrontend {
 public:
  explicit HttpFrontend(JobService& service);
  ~HttpFrontend();

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port" with ECRECER_BIND taking precedence over `fallback`.
std::pair<std::string, int> resolve_bind_address(const std::string& fallback);
std::filesystem::path resolve_store_dir(const std::filesystem::path& fallback);

}  // namespace ecrecer

#endif  // ECRECER_JOB_SERVICE_H_
