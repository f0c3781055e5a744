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

#include "ecrecer/job_service.h"

#include <algorithm>
#include <cstdlib>
#include <ctime>

#include "httplib.h"
#include "json.hpp"

#include "ecrecer/digest.h"
#include "ecrecer/error.h"
#include "ecrecer/fasta.h"

namespace ecrecer {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kJobFile = "job.json";
constexpr const char* kInputFile = "input.fasta";
constexpr const char* kResultFile = "result.tsv";

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  size_t n = std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof(buf) - n, ".%03dZ", static_cast<int>(ms.count()));
  return buf;
}

int64_t epoch_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool valid_job_id(const std::string& id) {
  return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Pending: return "Pending";
    case JobState::Running: return "Running";
    case JobState::Done: return "Done";
    case JobState::Failed: return "Failed";
  }
  return "?";
}

JobState parse_job_state(std::string_view s) {
  if (s == "Pending") return JobState::Pending;
  if (s == "Running") return JobState::Running;
  if (s == "Done") return JobState::Done;
  if (s == "Failed") return JobState::Failed;
  throw ParseError("unknown job state '" + std::string(s) + "'");
}

bool legal_transition(JobState from, JobState to) {
  return (from == JobState::Pending && to == JobState::Running) ||
         (from == JobState::Running && (to == JobState::Done || to == JobState::Failed));
}

std::string Job::to_json() const {
  json h = json::array();
  for (const auto& e : history) h.push_back({{"state", to_string(e.state)}, {"at", e.at}});
  json j = {{"job_id", id},
            {"state", to_string(state)},
            {"mode", mode},
            {"submitted_at", submitted_at},
            {"input_digest", input_digest},
            {"queries", queries},
            {"history", h}};
  if (!finished_at.empty()) {
    j["finished_at"] = finished_at;
    j["finished_epoch"] = finished_epoch;
  }
  if (!result_path.empty()) {
    j["result_path"] = result_path;
    j["row_errors"] = row_errors;
  }
  if (!error.empty()) j["error"] = error;
  return j.dump(2) + "\n";
}

Job Job::from_json(const std::string& text) {
  try {
    auto j = json::parse(text);
    Job job;
    job.id = j.at("job_id").get<std::string>();
    job.state = parse_job_state(j.at("state").get<std::string>());
    job.mode = j.at("mode").get<std::string>();
    job.submitted_at = j.at("submitted_at").get<std::string>();
    job.input_digest = j.at("input_digest").get<std::string>();
    job.queries = j.value("queries", size_t{0});
    job.finished_at = j.value("finished_at", "");
    job.finished_epoch = j.value("finished_epoch", int64_t{0});
    job.result_path = j.value("result_path", "");
    job.row_errors = j.value("row_errors", size_t{0});
    job.error = j.value("error", "");
    for (const auto& e : j.at("history")) {
      job.history.push_back({parse_job_state(e.at("state").get<std::string>()),
                             e.at("at").get<std::string>()});
    }
    return job;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad job record: ") + e.what());
  }
}

// ------------------------------------------------------------------ store

JobStore::JobStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path JobStore::dir(const std::string& id) const { return root_ / id; }

void JobStore::save(const Job& job) { write_file_atomic(dir(job.id) / kJobFile, job.to_json()); }

Job JobStore::create(const std::string& fasta, OutputMode mode) {
  Job job;
  job.id = random_token_hex();
  job.mode = std::string(to_string(mode));
  job.submitted_at = utc_now();
  job.input_digest = sha256_hex(fasta);
  job.history.push_back({JobState::Pending, job.submitted_at});
  std::lock_guard lock(mu_);
  fs::create_directories(dir(job.id));
  write_file_atomic(dir(job.id) / kInputFile, fasta);
  save(job);
  return job;
}

std::optional<Job> JobStore::get(const std::string& id) const {
  if (!valid_job_id(id)) return std::nullopt;
  std::lock_guard lock(mu_);
  auto path = dir(id) / kJobFile;
  if (!fs::exists(path)) return std::nullopt;
  return Job::from_json(read_file(path));
}

std::string JobStore::input(const std::string& id) const {
  std::lock_guard lock(mu_);
  return read_file(dir(id) / kInputFile);
}

std::optional<std::string> JobStore::result(const std::string& id) const {
  auto job = get(id);
  if (!job || job->state != JobState::Done) return std::nullopt;
  std::lock_guard lock(mu_);
  return read_file(dir(id) / job->result_path);
}

void JobStore::transition(Job& job, JobState to, const std::string& error) {
  if (!legal_transition(job.state, to)) {
    throw InvalidArgument("illegal job transition " + std::string(to_string(job.state)) + " -> " +
                          std::string(to_string(to)));
  }
  std::lock_guard lock(mu_);
  if (to == JobState::Done &&
      (job.result_path.empty() || !fs::exists(dir(job.id) / job.result_path))) {
    throw InvalidArgument("job " + job.id + " cannot be Done without a result");
  }
  job.state = to;
  auto at = utc_now();
  job.history.push_back({to, at});
  if (to == JobState::Done || to == JobState::Failed) {
    job.finished_at = at;
    job.finished_epoch = epoch_now();
  }
  if (!error.empty()) job.error = error;
  save(job);
}

void JobStore::write_result(Job& job, const std::string& tsv) {
  std::lock_guard lock(mu_);
  write_file_atomic(dir(job.id) / kResultFile, tsv);
  job.result_path = kResultFile;
}

std::vector<Job> JobStore::list() const {
  std::vector<Job> jobs;
  std::lock_guard lock(mu_);
  for (const auto& entry : fs::directory_iterator(root_)) {
    auto path = entry.path() / kJobFile;
    if (!entry.is_directory() || !valid_job_id(entry.path().filename().string()) ||
        !fs::exists(path)) {
      continue;
    }
    jobs.push_back(Job::from_json(read_file(path)));
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return a.submitted_at != b.submitted_at ? a.submitted_at < b.submitted_at : a.id < b.id;
  });
  return jobs;
}

void JobStore::remove(const std::string& id) {
  if (!valid_job_id(id)) return;
  std::lock_guard lock(mu_);
  fs::remove_all(dir(id));
}

std::vector<std::string> JobStore::recover() {
  {
    std::lock_guard lock(mu_);
    std::vector<fs::path> orphans;
    for (const auto& entry : fs::directory_iterator(root_)) {
      if (entry.is_directory() && valid_job_id(entry.path().filename().string()) &&
          !fs::exists(entry.path() / kJobFile)) {
        orphans.push_back(entry.path());
      }
    }
    for (const auto& p : orphans) fs::remove_all(p);
  }
  std::vector<std::string> pending;
  for (auto& job : list()) {
    if (job.state == JobState::Running) {
      transition(job, JobState::Failed, "interrupted by a service restart");
    } else if (job.state == JobState::Pending) {
      pending.push_back(job.id);
    }
  }
  return pending;
}

// ---------------------------------------------------------------- service

JobService::JobService(std::shared_ptr<const ModelBundle> bundle, ServiceConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config)), store_(config_.store_dir) {
  for (auto& id : store_.recover()) queue_.push_back(id);
  size_t n = config_.workers ? config_.workers : std::max(1u, std::thread::hardware_concurrency());
  for (size_t i = 0; i < n; ++i) threads_.emplace_back([this] { worker(); });
}

JobService::~JobService() { stop(); }

void JobService::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
  threads_.clear();
}

Job JobService::submit(const std::string& fasta, OutputMode mode) {
  expire();
  Job job = store_.create(fasta, mode);
  {
    std::lock_guard lock(mu_);
    queue_.push_back(job.id);
  }
  cv_.notify_one();
  return job;
}

std::optional<std::string> JobService::result(const std::string& id) const {
  return store_.result(id);
}

size_t JobService::expire() {
  if (!config_.result_ttl) return 0;
  const int64_t cutoff = epoch_now() - config_.result_ttl->count();
  size_t n = 0;
  for (const auto& job : store_.list()) {
    bool finished = job.state == JobState::Done || job.state == JobState::Failed;
    if (finished && job.finished_epoch < cutoff) {
      store_.remove(job.id);
      ++n;
    }
  }
  return n;
}

void JobService::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
}

void JobService::worker() {
  while (true) {
    std::string id;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      ++running_;
    }
    run(id);
    {
      std::lock_guard lock(mu_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

void JobService::run(const std::string& id) {
  auto found = store_.get(id);
  if (!found || found->state != JobState::Pending) return;
  Job job = *found;
  store_.transition(job, JobState::Running);
  try {
    auto entries = parse_fasta_text(store_.input(id));
    auto out = predict_entries(*bundle_, entries, parse_output_mode(job.mode));
    job.queries = entries.size();
    job.row_errors = out.errors.size();
    store_.write_result(job, out.tsv);
    store_.transition(job, JobState::Done);
  } catch (const std::exception& e) {
    store_.transition(job, JobState::Failed, e.what());
  }
}

// ------------------------------------------------------------------- HTTP

struct HttpFrontend::Impl {
  JobService& service;
  httplib::Server server;
  explicit Impl(JobService& s) : service(s) {}
};

HttpFrontend::HttpFrontend(JobService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  JobService& svc = service;
  auto json_error = [](httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(json({{"error", msg}}).dump() + "\n", "application/json");
  };

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}\n", "application/json");
  });

  srv.Post("/jobs", [&svc, json_error](const httplib::Request& req, httplib::Response& res) {
    OutputMode mode = OutputMode::Prediction;
    try {
      if (req.has_param("mode")) mode = parse_output_mode(req.get_param_value("mode"));
    } catch (const Error& e) {
      return json_error(res, 400, e.what());
    }
    std::string fasta;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("fasta")) return json_error(res, 400, "multipart field 'fasta' missing");
      fasta = req.get_file_value("fasta").content;
    } else {
      fasta = req.body;
    }
    Job job = svc.submit(fasta, mode);
    res.status = 202;
    res.set_content(json({{"job_id", job.id}, {"state", to_string(job.state)}}).dump() + "\n",
                    "application/json");
  });

  srv.Get(R"(/jobs/([0-9a-f]+))",
          [&svc, json_error](const httplib::Request& req, httplib::Response& res) {
            auto job = svc.get(req.matches[1]);
            if (!job) return json_error(res, 404, "unknown job");
            res.set_content(job->to_json(), "application/json");
          });

  srv.Get(R"(/jobs/([0-9a-f]+)/result)",
          [&svc, json_error](const httplib::Request& req, httplib::Response& res) {
            std::string id = req.matches[1];
            auto job = svc.get(id);
            if (!job) return json_error(res, 404, "unknown job");
            if (job->state != JobState::Done) {
              return json_error(res, 404, "job is " + std::string(to_string(job->state)));
            }
            auto body = svc.result(id);
            if (!body) return json_error(res, 404, "result missing");
            res.set_content(*body, "text/tab-separated-values");
          });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) {
    int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpFrontend::listen() { impl_->server.listen_after_bind(); }

void HttpFrontend::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

std::pair<std::string, int> resolve_bind_address(const std::string& fallback) {
  const char* env = std::getenv("ECRECER_BIND");
  std::string addr = env && *env ? env : fallback;
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw InvalidArgument("bind address needs host:port: " + addr);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("bad port in bind address " + addr);
  }
  if (port < 0 || port > 65535) throw InvalidArgument("bad port in bind address " + addr);
  return {addr.substr(0, colon), port};
}

std::filesystem::path resolve_store_dir(const std::filesystem::path& fallback) {
  const char* env = std::getenv("ECRECER_STORE");
  return env && *env ? std::filesystem::path(env) : fallback;
}

}  // namespace ecrecer
