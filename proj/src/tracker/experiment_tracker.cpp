// Copyright 2026 The dlflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tracker/experiment_tracker.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <thread>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/uuid.hpp"

namespace dlflow::tracker {
namespace {

std::string trial_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index + 1);
  return buf;
}

json metrics_json(const Metrics& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

Metrics metrics_from(const json& j) {
  Metrics m;
  for (const auto& [k, v] : j.items()) m[k] = v.get<double>();
  return m;
}

template <typename T>
T field(const json& j, const char* name, T fallback) {
  if (!j.contains(name) || j.at(name).is_null()) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidConfig, std::string("config field ") + name + " has the wrong type");
  }
}

bool better(double a, double b, bool maximize) { return maximize ? a > b : a < b; }

}  // namespace

// ------------------------------------------------------------------ config

json DataSource::to_json() const {
  return {{"repo", repo}, {"ref", ref}, {"split", split}, {"prefix", prefix}};
}

DataSource DataSource::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "data source must be a map");
  DataSource d;
  d.repo = field<std::string>(j, "repo", "");
  d.ref = field<std::string>(j, "ref", store::DataStore::kDefaultBranch);
  d.split = field<std::string>(j, "split", "train");
  d.prefix = field<std::string>(j, "prefix", "");
  if (d.repo.empty()) fail(ErrorCode::kInvalidConfig, "data source needs a repo");
  labels::parse_split(d.split);
  return d;
}

const char* to_string(SearcherKind kind) noexcept {
  switch (kind) {
    case SearcherKind::kSingle: return "single";
    case SearcherKind::kGrid: return "grid";
    case SearcherKind::kRandom: return "random";
    case SearcherKind::kAsha: return "asha";
  }
  return "?";
}

json SearcherConfig::to_json() const {
  json j = {{"name", to_string(kind)}, {"metric", metric}, {"workers", workers}};
  if (kind == SearcherKind::kAsha) {
    j["max_resource"] = asha.max_resource;
    j["min_resource"] = asha.min_resource;
    j["reduction_factor"] = asha.reduction_factor;
    j["max_trials"] = asha.max_trials;
    j["mode"] = asha.synchronous ? "sync" : "async";
    j["seed"] = seed;
  } else {
    j["steps"] = steps;
    j["eval_every"] = eval_every;
    if (kind == SearcherKind::kRandom) {
      j["n"] = num_samples;
      j["seed"] = seed;
    }
  }
  return j;
}

SearcherConfig SearcherConfig::from_json(const json& j) {
  SearcherConfig s;
  if (j.is_string()) {
    if (j.get<std::string>() != "single") fail(ErrorCode::kInvalidConfig, "searcher needs settings");
    return s;
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "searcher must be a map");
  const auto name = field<std::string>(j, "name", field<std::string>(j, "type", "single"));
  if (name == "single") {
    s.kind = SearcherKind::kSingle;
  } else if (name == "grid") {
    s.kind = SearcherKind::kGrid;
  } else if (name == "random") {
    s.kind = SearcherKind::kRandom;
  } else if (name == "asha") {
    s.kind = SearcherKind::kAsha;
  } else {
    fail(ErrorCode::kInvalidConfig, "unknown searcher " + name);
  }
  s.steps = field<int64_t>(j, "steps", field<int64_t>(j, "max_resource", 100));
  s.eval_every = field<int64_t>(j, "eval_every", 0);
  s.num_samples = field<int64_t>(j, "n", field<int64_t>(j, "num_samples", 1));
  s.seed = field<uint64_t>(j, "seed", 0);
  s.metric = field<std::string>(j, "metric", "accuracy");
  s.workers = field<int>(j, "workers", 1);
  s.asha.max_resource = field<int64_t>(j, "max_resource", 9);
  s.asha.min_resource = field<int64_t>(j, "min_resource", 1);
  s.asha.reduction_factor = field<int64_t>(j, "reduction_factor", 3);
  s.asha.max_trials = field<int64_t>(j, "max_trials", 9);
  const auto mode = field<std::string>(j, "mode", "sync");
  if (mode != "sync" && mode != "async") fail(ErrorCode::kInvalidConfig, "mode must be sync or async");
  s.asha.synchronous = mode == "sync";
  if (s.steps < 1) fail(ErrorCode::kInvalidConfig, "steps must be positive");
  if (s.eval_every < 0) fail(ErrorCode::kInvalidConfig, "eval_every must be non-negative");
  if (s.num_samples < 1) fail(ErrorCode::kInvalidConfig, "n must be positive");
  if (s.workers < 1 || s.workers > 64) fail(ErrorCode::kInvalidConfig, "workers must be in [1, 64]");
  if (s.kind == SearcherKind::kAsha) s.asha.validate();
  return s;
}

bool ExperimentConfig::maximizes(const std::string& metric) const {
  auto it = maximize.find(metric);
  if (it == maximize.end()) fail(ErrorCode::kInvalidConfig, "no direction declared for metric " + metric);
  return it->second;
}

json ExperimentConfig::to_json() const {
  json dirs = json::object();
  for (const auto& [k, v] : maximize) dirs[k] = v ? "max" : "min";
  return {{"name", name},
          {"data", data.to_json()},
          {"entry_point", entry_point},
          {"hparams", hparams.to_json()},
          {"searcher", searcher.to_json()},
          {"resources", resources.to_json()},
          {"seed", seed},
          {"metrics", dirs},
          {"metadata", metadata}};
}

HashId ExperimentConfig::config_hash() const { return sha256_hex(canonical(to_json())); }

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "experiment config must be a map");
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", "");
  if (c.name.empty()) fail(ErrorCode::kInvalidConfig, "experiment needs a name");
  if (j.contains("data")) {
    c.data = DataSource::from_json(j.at("data"));
  } else if (j.contains("data_source")) {
    c.data = DataSource::from_json(j.at("data_source"));
  } else {
    fail(ErrorCode::kInvalidConfig, "experiment needs a data source");
  }
  c.entry_point = field<std::string>(j, "entry_point", "");
  if (c.entry_point.empty()) fail(ErrorCode::kInvalidConfig, "experiment needs an entry_point");
  c.hparams = HyperparameterSpace::from_json(j.value("hparams", json::object()));
  c.searcher = SearcherConfig::from_json(j.value("searcher", json("single")));
  if (j.contains("resources")) c.resources = pipeline::ResourceHints::from_json(j.at("resources"));
  c.seed = field<uint64_t>(j, "seed", 0);
  if (j.contains("metrics")) {
    for (const auto& [k, v] : j.at("metrics").items()) {
      const auto d = v.get<std::string>();
      if (d != "max" && d != "min") fail(ErrorCode::kInvalidConfig, "metric direction must be min or max");
      c.maximize[k] = d == "max";
    }
  }
  c.metadata = j.value("metadata", json::object());
  (void)c.maximizes(c.searcher.metric);
  return c;
}

const char* to_string(TrialState state) noexcept {
  switch (state) {
    case TrialState::kCreated: return "created";
    case TrialState::kRunning: return "running";
    case TrialState::kCompleted: return "completed";
    case TrialState::kEarlyStopped: return "early-stopped";
    case TrialState::kErrored: return "errored";
  }
  return "?";
}

TrialState parse_trial_state(const std::string& s) {
  for (auto st : {TrialState::kCreated, TrialState::kRunning, TrialState::kCompleted,
                  TrialState::kEarlyStopped, TrialState::kErrored}) {
    if (s == to_string(st)) return st;
  }
  fail(ErrorCode::kInvalidArgument, "unknown trial state " + s);
}

json TrialRecord::to_json() const {
  json j = {{"experiment", experiment},       {"trial_id", trial_id}, {"hparams", hparams},
            {"seed", seed},                   {"state", to_string(state)}, {"rung", rung},
            {"steps_trained", steps_trained}, {"checkpoints", checkpoints}};
  if (!error.empty()) j["error"] = error;
  return j;
}

TrialRecord TrialRecord::from_json(const json& j) {
  TrialRecord t;
  t.experiment = j.at("experiment").get<std::string>();
  t.trial_id = j.at("trial_id").get<std::string>();
  t.hparams = j.at("hparams");
  t.seed = j.at("seed").get<uint64_t>();
  t.state = parse_trial_state(j.at("state").get<std::string>());
  t.rung = j.at("rung").get<int>();
  t.steps_trained = j.at("steps_trained").get<int64_t>();
  t.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
  t.error = j.value("error", std::string());
  return t;
}

json Checkpoint::to_json() const {
  return {{"id", id},         {"experiment", experiment}, {"trial_id", trial_id},
          {"step", step},     {"artifacts", artifacts},   {"metrics", metrics_json(metrics)},
          {"commit", commit}};
}

Checkpoint Checkpoint::from_json(const json& j) {
  Checkpoint c;
  c.id = j.at("id").get<std::string>();
  c.experiment = j.at("experiment").get<std::string>();
  c.trial_id = j.at("trial_id").get<std::string>();
  c.step = j.at("step").get<int64_t>();
  c.artifacts = j.at("artifacts").get<std::map<std::string, HashId>>();
  c.metrics = metrics_from(j.at("metrics"));
  c.commit = j.at("commit").get<std::string>();
  return c;
}

// ----------------------------------------------------------------- tracker

ExperimentTracker::ExperimentTracker(store::DataStore& store, labels::LabelStore& labels,
                                     learners::LearnerRegistry learners)
    : store_(store), labels_(labels), learners_(std::move(learners)) {}

learners::Dataset ExperimentTracker::load_dataset(const DataSource& source) const {
  if (!store_.has_repo(source.repo)) fail(ErrorCode::kDataNotFound, "no data repo " + source.repo);
  store::Commit commit;
  try {
    commit = store_.resolve(source.repo, source.ref);
  } catch (const Error& e) {
    fail(ErrorCode::kDataNotFound, e.what());
  }
  std::map<std::string, std::string> label_of;
  for (auto& r : labels_.records(labels::parse_split(source.split), source.repo, commit.id)) {
    label_of.emplace(r.path, r.label);
  }
  learners::Dataset ds;
  ds.repo = source.repo;
  ds.commit = commit.id;
  ds.split = source.split;
  ds.prefix = source.prefix;
  for (const auto& [path, blob] : store_.tree(commit)) {
    if (path.compare(0, source.prefix.size(), source.prefix) != 0) continue;
    learners::DataFile f;
    f.path = path.substr(source.prefix.size());
    f.blob = blob;
    f.content = store_.objects().get(blob);
    if (auto it = label_of.find(path); it != label_of.end()) f.label = it->second;
    ds.files.push_back(std::move(f));
  }
  if (ds.files.empty()) {
    fail(ErrorCode::kDataNotFound, "no files under '" + source.prefix + "' in " + source.repo + "@" + commit.id);
  }
  return ds;
}

std::string ExperimentTracker::allocate_id() {
  fs::create_directories(dir());
  FileLock lock(dir() / ".lock");
  int max_seen = 0;
  for (const auto& e : fs::directory_iterator(dir())) {
    const auto n = e.path().filename().string();
    if (e.is_directory() && n.rfind("exp-", 0) == 0) max_seen = std::max(max_seen, std::atoi(n.c_str() + 4));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "exp-%04d", max_seen + 1);
  fs::create_directories(dir() / buf / "trials");
  fs::create_directories(dir() / buf / "metrics");
  return buf;
}

void ExperimentTracker::write_trial(const TrialRecord& t) const {
  write_json_atomic(exp_dir(t.experiment) / "trials" / (t.trial_id + ".json"), t.to_json());
}

Checkpoint ExperimentTracker::save_checkpoint(const std::string& experiment, const TrialRecord& trial,
                                              const learners::Learner& learner, const Metrics& metrics) {
  const auto artifacts = learner.save();
  std::map<std::string, std::string> files;
  Checkpoint c;
  c.experiment = experiment;
  c.trial_id = trial.trial_id;
  c.step = trial.steps_trained;
  c.metrics = metrics;
  const std::string base = trial.trial_id + "/" + std::to_string(c.step) + "/";
  for (const auto& [name, bytes] : artifacts) {
    files[base + name] = bytes;
    c.artifacts[name] = sha256_hex(bytes);
  }
  store::DataStore::CommitOptions opts;
  opts.overlay = true;
  opts.notify = false;
  const auto commit = store_.commit_files(kArtifactRepo, experiment, files, "experiment-tracker",
                                          "checkpoint " + trial.trial_id + "@" + std::to_string(c.step), opts);
  c.commit = commit.id;
  c.id = uuid_from_name("checkpoint/" + experiment + "/" + trial.trial_id + "/" + std::to_string(c.step) + "/" +
                        sha256_hex(canonical(json(c.artifacts))));
  write_json_atomic(dir() / "checkpoints" / (c.id + ".json"), c.to_json());
  return c;
}

// State of one run_experiment call.
struct ExperimentTracker::Run {
  struct Task {
    enum class Kind { kNew, kContinue, kWait, kHalt } kind = Kind::kHalt;
    int index = -1;
    int rung = 0;
    int64_t target_steps = 0;
  };
  struct Live {
    TrialRecord record;
    std::unique_ptr<learners::Learner> learner;
    Metrics last_validation;
  };

  ExperimentTracker& self;
  const ExperimentConfig& config;
  std::string id;
  learners::Dataset data;
  std::vector<json> assignments;  // pre-enumerated for single/grid/random
  std::optional<AshaScheduler> asha;
  Rng sampler;
  int running = 0;
  int next_index = 0;
  std::map<int, Live> trials;

  Run(ExperimentTracker& s, const ExperimentConfig& c, std::string exp_id, learners::Dataset ds)
      : self(s), config(c), id(std::move(exp_id)), data(std::move(ds)), sampler(c.searcher.seed) {}

  Task next() {
    Task t;
    if (asha) {
      const auto d = asha->decide();
      switch (d.action) {
        case AshaScheduler::Action::kStartNew:
          t.kind = Task::Kind::kNew;
          break;
        case AshaScheduler::Action::kPromote:
          t.kind = Task::Kind::kContinue;
          break;
        case AshaScheduler::Action::kWait:
          t.kind = Task::Kind::kWait;
          return t;
        case AshaScheduler::Action::kHalt:
          return t;
      }
      t.index = d.trial;
      t.rung = d.rung;
      t.target_steps = asha->resource(d.rung);
      if (t.kind == Task::Kind::kNew) create(t.index, config.hparams.sample(sampler));
    } else if (next_index < static_cast<int>(assignments.size())) {
      t.kind = Task::Kind::kNew;
      t.index = next_index++;
      t.target_steps = config.searcher.steps;
      create(t.index, assignments[static_cast<std::size_t>(t.index)]);
    } else {
      t.kind = running > 0 ? Task::Kind::kWait : Task::Kind::kHalt;
      return t;
    }
    ++running;
    Live& live = trials.at(t.index);
    live.record.state = TrialState::kRunning;
    live.record.rung = t.rung;
    self.write_trial(live.record);
    return t;
  }

  void create(int index, json hparams) {
    Live live;
    live.record.experiment = id;
    live.record.trial_id = trial_name(index);
    live.record.hparams = std::move(hparams);
    live.record.seed = Rng::mix(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(index + 1)));
    self.write_trial(live.record);
    trials.emplace(index, std::move(live));
  }

  // Trains outside the decision lock; only this worker touches `live`.
  std::optional<double> execute(const Task& t) {
    Live& live = trials.at(t.index);
    try {
      if (t.kind == Task::Kind::kNew) {
        live.learner = self.learners_.create(config.entry_point);
        live.learner->init(live.record.hparams, live.record.seed);
        live.learner->load_data(data);
      }
      const int64_t every = config.searcher.eval_every > 0 && !asha ? config.searcher.eval_every : 0;
      while (live.record.steps_trained < t.target_steps) {
        int64_t chunk = t.target_steps - live.record.steps_trained;
        if (every > 0) chunk = std::min(chunk, every);
        Metrics m = live.learner->train(chunk);
        live.record.steps_trained += chunk;
        live.last_validation = live.learner->evaluate();
        for (const auto& [k, v] : live.last_validation) m[k] = v;
        self.log_metrics(id, live.record.trial_id, live.record.steps_trained, m);
      }
      if (live.last_validation.empty()) live.last_validation = live.learner->evaluate();
      const auto cp = self.save_checkpoint(id, live.record, *live.learner, live.last_validation);
      live.record.checkpoints.push_back(cp.id);
      auto it = live.last_validation.find(config.searcher.metric);
      if (it == live.last_validation.end()) {
        fail(ErrorCode::kLearnerError, "learner did not report metric " + config.searcher.metric);
      }
      return it->second;
    } catch (const std::exception& e) {
      live.record.state = TrialState::kErrored;
      live.record.error = e.what();
      live.learner.reset();
      return std::nullopt;
    }
  }

  void report(const Task& t, std::optional<double> metric) {
    --running;
    Live& live = trials.at(t.index);
    if (!metric) {
      if (asha) asha->report_error(t.index);
    } else if (asha) {
      asha->report(t.index, t.rung, *metric);
    } else {
      live.record.state = TrialState::kCompleted;
      live.learner.reset();
    }
    self.write_trial(live.record);
  }

  void work(std::mutex& mu, std::condition_variable& cv) {
    std::unique_lock lk(mu);
    for (;;) {
      const Task t = next();
      if (t.kind == Task::Kind::kHalt) {
        cv.notify_all();
        return;
      }
      if (t.kind == Task::Kind::kWait) {
        cv.wait(lk);
        continue;
      }
      lk.unlock();
      const auto metric = execute(t);
      lk.lock();
      report(t, metric);
      cv.notify_all();
    }
  }

  void finish() {
    for (auto& [index, live] : trials) {
      if (live.record.state != TrialState::kErrored) {
        live.record.state = !asha || asha->completed_rung(index) == asha->top_rung()
                                ? TrialState::kCompleted
                                : TrialState::kEarlyStopped;
      }
      live.learner.reset();
      self.write_trial(live.record);
    }
  }

  json search_summary() const {
    json s = {{"searcher", to_string(config.searcher.kind)}, {"trials_created", trials.size()}};
    if (!asha) return s;
    json rungs = json::array();
    for (int k = 0; k <= asha->top_rung(); ++k) {
      json done = json::array();
      for (const auto& [t, m] : asha->rungs()[static_cast<std::size_t>(k)]) {
        done.push_back({{"trial", trial_name(t)}, {"metric", m}});
      }
      rungs.push_back({{"rung", k}, {"resource", asha->resource(k)}, {"completed", done}});
    }
    json promos = json::array();
    for (const auto& p : asha->promotions()) {
      promos.push_back({{"trial", trial_name(p.trial)}, {"from", p.from}, {"to", p.to}});
    }
    s["rungs"] = rungs;
    s["promotions"] = promos;
    return s;
  }
};

std::string ExperimentTracker::run_experiment(const ExperimentConfig& config) {
  if (!learners_.contains(config.entry_point)) {
    fail(ErrorCode::kInvalidConfig, "unknown entry point " + config.entry_point);
  }
  (void)config.maximizes(config.searcher.metric);
  auto data = load_dataset(config.data);
  std::vector<json> assignments;
  switch (config.searcher.kind) {
    case SearcherKind::kSingle:
      if (!config.hparams.is_fixed()) {
        fail(ErrorCode::kInvalidConfig, "the single searcher needs fixed hyperparameters");
      }
      assignments.push_back(config.hparams.grid().front());
      break;
    case SearcherKind::kGrid:
      assignments = config.hparams.grid();
      break;
    case SearcherKind::kRandom: {
      Rng rng(config.searcher.seed);
      for (int64_t i = 0; i < config.searcher.num_samples; ++i) assignments.push_back(config.hparams.sample(rng));
      break;
    }
    case SearcherKind::kAsha:
      break;
  }

  store_.ensure_repo(kArtifactRepo);
  const std::string id = allocate_id();
  const auto commit = store_.resolve(config.data.repo, config.data.ref);
  json record = {{"id", id},
                 {"name", config.name},
                 {"config", config.to_json()},
                 {"config_hash", config.config_hash()},
                 {"entry_point", config.entry_point},
                 {"data",
                  {{"repo", data.repo},
                   {"ref", config.data.ref},
                   {"commit", data.commit},
                   {"branch", commit.branch},
                   {"split", data.split},
                   {"prefix", data.prefix},
                   {"files", data.files.size()},
                   {"digest", data.digest()}}},
                 {"state", "running"},
                 {"created_at", store_.clock().now()}};
  write_json_atomic(exp_dir(id) / "experiment.json", record);

  Run run(*this, config, id, std::move(data));
  run.assignments = std::move(assignments);
  if (config.searcher.kind == SearcherKind::kAsha) {
    run.asha.emplace(config.searcher.asha, config.maximizes(config.searcher.metric));
  }
  std::mutex mu;
  std::condition_variable cv;
  if (config.searcher.workers == 1) {
    run.work(mu, cv);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < config.searcher.workers; ++w) pool.emplace_back([&] { run.work(mu, cv); });
    for (auto& th : pool) th.join();
  }
  run.finish();

  record["state"] = "completed";
  record["finished_at"] = store_.clock().now();
  json tids = json::array();
  for (const auto& [index, live] : run.trials) tids.push_back(live.record.trial_id);
  record["trials"] = tids;
  record["search"] = run.search_summary();
  try {
    const auto best = best_checkpoint(id, config.searcher.metric, config.maximizes(config.searcher.metric));
    record["best"] = {{"trial", best.trial_id},
                      {"checkpoint", best.id},
                      {"metric", config.searcher.metric},
                      {"value", best.metrics.at(config.searcher.metric)}};
  } catch (const Error&) {
    record["best"] = nullptr;
  }
  write_json_atomic(exp_dir(id) / "experiment.json", record);
  return id;
}

json ExperimentTracker::experiment(const std::string& id) const {
  const auto p = exp_dir(id) / "experiment.json";
  if (id.find('/') != std::string::npos || !fs::exists(p)) fail(ErrorCode::kNotFound, "no experiment " + id);
  return read_json(p);
}

ExperimentConfig ExperimentTracker::experiment_config(const std::string& id) const {
  return ExperimentConfig::from_json(experiment(id).at("config"));
}

std::vector<std::string> ExperimentTracker::list_experiments() const {
  std::vector<std::string> out;
  if (!fs::exists(dir())) return out;
  for (const auto& e : fs::directory_iterator(dir())) {
    const auto n = e.path().filename().string();
    if (e.is_directory() && n.rfind("exp-", 0) == 0 && fs::exists(e.path() / "experiment.json")) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TrialRecord> ExperimentTracker::trials(const std::string& experiment_id) const {
  (void)experiment(experiment_id);
  std::vector<TrialRecord> out;
  for (const auto& e : fs::directory_iterator(exp_dir(experiment_id) / "trials")) {
    if (e.path().extension() == ".json") out.push_back(TrialRecord::from_json(read_json(e.path())));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.trial_id < b.trial_id; });
  return out;
}

TrialRecord ExperimentTracker::trial(const std::string& experiment_id, const std::string& trial_id) const {
  const auto p = exp_dir(experiment_id) / "trials" / (trial_id + ".json");
  if (trial_id.find('/') != std::string::npos || !fs::exists(p)) {
    fail(ErrorCode::kNotFound, "no trial " + experiment_id + "/" + trial_id);
  }
  return TrialRecord::from_json(read_json(p));
}

void ExperimentTracker::log_metrics(const std::string& experiment_id, const std::string& trial_id,
                                    int64_t step, const Metrics& metrics) {
  (void)trial(experiment_id, trial_id);
  const auto path = exp_dir(experiment_id) / "metrics" / (trial_id + ".jsonl");
  FileLock lock(path.string() + ".lock");
  const auto series = read_jsonl(path);
  if (!series.empty() && step <= series.back().at("step").get<int64_t>()) {
    fail(ErrorCode::kNonMonotonicStep, "step " + std::to_string(step) + " is not after step " +
                                           std::to_string(series.back().at("step").get<int64_t>()));
  }
  append_line(path, json{{"step", step}, {"metrics", metrics_json(metrics)}}.dump());
}

std::vector<MetricPoint> ExperimentTracker::metrics(const std::string& experiment_id,
                                                    const std::string& trial_id) const {
  (void)trial(experiment_id, trial_id);
  std::vector<MetricPoint> out;
  for (const auto& row : read_jsonl(exp_dir(experiment_id) / "metrics" / (trial_id + ".jsonl"))) {
    out.push_back({row.at("step").get<int64_t>(), metrics_from(row.at("metrics"))});
  }
  return out;
}

Checkpoint ExperimentTracker::checkpoint(const std::string& id) const {
  const auto p = dir() / "checkpoints" / (id + ".json");
  if (id.empty() || id.find('/') != std::string::npos || !fs::exists(p)) {
    fail(ErrorCode::kMissingCheckpoint, "no checkpoint " + id);
  }
  return Checkpoint::from_json(read_json(p));
}

bool ExperimentTracker::has_checkpoint(const std::string& id) const {
  return !id.empty() && id.find('/') == std::string::npos && fs::exists(dir() / "checkpoints" / (id + ".json"));
}

Checkpoint ExperimentTracker::best_checkpoint(const std::string& experiment_id, const std::string& metric,
                                              bool maximize) const {
  std::optional<Checkpoint> best;
  bool any_finished = false;
  for (const auto& t : trials(experiment_id)) {
    if (t.state != TrialState::kCompleted && t.state != TrialState::kEarlyStopped) continue;
    any_finished = true;
    for (const auto& cid : t.checkpoints) {
      Checkpoint c = checkpoint(cid);
      auto it = c.metrics.find(metric);
      if (it == c.metrics.end()) continue;
      // Trials are visited in id order and checkpoints in step order, so a
      // strict improvement test keeps the declared tie-break.
      if (!best || better(it->second, best->metrics.at(metric), maximize)) best = std::move(c);
    }
  }
  if (!any_finished) fail(ErrorCode::kNoCompletedTrials, "experiment " + experiment_id + " has no finished trials");
  if (!best) fail(ErrorCode::kNoCompletedTrials, "no checkpoint records metric " + metric);
  return *best;
}

learners::Artifacts ExperimentTracker::checkpoint_artifacts(const Checkpoint& c) const {
  learners::Artifacts out;
  for (const auto& [name, blob] : c.artifacts) {
    if (!store_.objects().contains(blob)) fail(ErrorCode::kMissingArtifact, "artifact blob " + blob + " is missing");
    out[name] = store_.objects().get(blob);
  }
  return out;
}

std::unique_ptr<learners::Learner> ExperimentTracker::restore_learner(const Checkpoint& c) const {
  const auto cfg = experiment_config(c.experiment);
  const auto t = trial(c.experiment, c.trial_id);
  auto learner = learners_.create(cfg.entry_point);
  learner->init(t.hparams, t.seed);
  learner->restore(checkpoint_artifacts(c));
  return learner;
}

}  // namespace dlflow::tracker
