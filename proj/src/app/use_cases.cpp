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

#include <algorithm>
#include <functional>

#include "app/context.hpp"
#include "common/error.hpp"
#include "learners/mlp_learners.hpp"
#include "learners/synth.hpp"

namespace dlflow::app {

namespace {

using governance::Role;

// Drives the workflow run alongside the real work and names the failing
// step when something throws.
class Script {
 public:
  Script(Context& ctx, governance::Project project) : ctx_(ctx), project_(std::move(project)) {}

  [[nodiscard]] const governance::Project& project() const { return project_; }

  [[nodiscard]] std::string actor(Role role) const {
    for (const auto& [id, r] : project_.actors) {
      if (r == role) return id;
    }
    fail(ErrorCode::kPermissionDenied,
         "project " + project_.name + " has no " + governance::to_string(role));
  }

  void enter(const std::string& step, const std::string& note = "", const json& artifacts = json::object()) {
    const auto& s = workflow::StepGraph::standard().step(step);
    const std::string who = s.owner ? actor(*s.owner) : project_.actors.begin()->first;
    guard(step, [&] { (void)ctx_.advance(step, who, note, artifacts); });
    steps_.push_back(step);
  }

  template <class F>
  auto guard(const std::string& step, F&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const Error& e) {
      fail(e.code(), "use case stopped at step " + step + ": " + e.what());
    } catch (const std::exception& e) {
      fail(ErrorCode::kInternal, "use case stopped at step " + step + ": " + e.what());
    }
  }

  // Reaches data-collection from a fresh run or from model maintenance.
  void open(const std::string& purpose) {
    auto& wf = ctx_.workflow();
    if (!wf.has_run(project_.name)) {
      (void)ctx_.init_project(project_, project_.actors.begin()->first);
    }
    const auto current = wf.run(project_.name).current_step;
    if (current == workflow::kStartStep) {
      enter("define-project-requirements", purpose);
      enter("initial-setup", "local single-process orchestrator");
      enter("data-collection");
    } else if (current == workflow::kMaintenanceStep) {
      enter("data-collection", purpose);
    } else {
      fail(ErrorCode::kIllegalTransition,
           "workflow for project " + project_.name + " is at " + current + "; cannot start a use case");
    }
  }

  [[nodiscard]] json steps() const { return steps_; }

 private:
  Context& ctx_;
  governance::Project project_;
  std::vector<std::string> steps_;
};

governance::Project project_for(Context& ctx, const std::string& which) {
  if (ctx.has_project()) return ctx.project();
  return governance::Project::standard(which);
}

void require_clean(Context& ctx, const std::vector<std::string>& repos) {
  for (const auto& r : repos) {
    if (ctx.store().has_repo(r)) {
      fail(ErrorCode::kDuplicateName, "repo " + r + " already exists; use cases need a clean DLFLOW_ROOT");
    }
  }
}

struct ModelOutcome {
  json report = json::object();
  std::string deployment;
};

// Shared tail: registration through deployment.
ModelOutcome release(Context& ctx, Script& s, const std::string& model, const std::string& experiment,
                     const tracker::DataSource& test_source) {
  ModelOutcome out;
  const auto cp = s.guard("model-registration", [&] { return ctx.tracker().best_checkpoint(experiment, "accuracy", true); });
  const auto mv = s.guard("model-registration", [&] {
    registry::ModelRegistry::Registration reg;
    reg.name = model;
    reg.checkpoint = cp.id;
    reg.creator = s.actor(Role::kDataScientist);
    reg.description = "trained by the " + model + " use case";
    return ctx.registry().register_model(reg);
  });
  s.enter("model-registration", "", {{"model", model}, {"version", mv.version}, {"checkpoint", cp.id}});

  const auto test_metrics = s.guard("model-evaluation", [&] {
    const auto learner = ctx.tracker().restore_learner(cp);
    const auto data = ctx.tracker().load_dataset(test_source);
    const auto m = learner->evaluate_dataset(data);
    tracker::Metrics t;
    for (const auto& [k, v] : m) t["test_" + k] = v;
    (void)ctx.registry().attach_test_metrics(model, mv.version, t);
    return std::make_pair(t, data.digest());
  });
  s.enter("model-evaluation", "", {{"test_accuracy", test_metrics.first.at("test_accuracy")}});

  s.guard("model-submission", [&] { (void)ctx.registry().submit(model, mv.version, s.actor(Role::kDataScientist)); });
  s.enter("model-submission");
  s.guard("review", [&] {
    (void)ctx.registry().review(model, mv.version, true, s.actor(Role::kModelValidator), "meets the gate");
  });
  s.enter("review", "approved");
  s.enter("model-implementation", "learner wrapper reused as serving code");
  s.enter("implementation-review", "no refactoring needed; compression skipped");

  const auto pkg = s.guard("model-packaging", [&] {
    (void)ctx.registry().promote_to_production(model, mv.version, s.actor(Role::kDevopsEngineer));
    return ctx.gateway().package_model(model, mv.version);
  });
  s.enter("model-packaging", "", {{"package", pkg.package_hash}});

  const auto dep = s.guard("model-deployment", [&] {
    return ctx.gateway().deploy(serving::DeploymentManifest::from_json(
        {{"deployment_name", model}, {"model_name", model}, {"selector", "production"}}));
  });
  s.enter("model-deployment", "", {{"deployment", dep.manifest.deployment_name}, {"endpoint", dep.manifest.endpoint}});

  out.deployment = dep.manifest.deployment_name;
  out.report = {{"model", model},
                {"model_version", mv.version},
                {"checkpoint", cp.id},
                {"checkpoint_trial", cp.trial_id},
                {"checkpoint_step", cp.step},
                {"weights_digest", cp.artifacts.at("weights")},
                {"validation_accuracy", cp.metrics.at("accuracy")},
                {"test_accuracy", test_metrics.first.at("test_accuracy")},
                {"test_loss", test_metrics.first.at("test_loss")},
                {"test_digest", test_metrics.second},
                {"gate", ctx.registry().project().gate_for(model).to_json()},
                {"package", pkg.package_hash},
                {"deployment", dep.manifest.deployment_name},
                {"endpoint", dep.manifest.endpoint}};
  return out;
}

json smoke_summary(const std::vector<serving::Prediction>& preds, const std::vector<std::string>& expected) {
  json rows = json::array();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    rows.push_back({{"expected", expected[i]},
                    {"label", preds[i].label},
                    {"model_version", preds[i].model_version},
                    {"request_id", preds[i].request_id}});
    if (preds[i].label == expected[i]) ++hits;
  }
  return {{"requests", rows}, {"correct", hits}, {"total", preds.size()}};
}

}  // namespace

json Context::run_news(const UseCaseOptions& options) {
  const std::string raw = "news-raw";
  const std::string clean = "news-clean";
  const std::string split = "news-split";
  const std::string model = "news-classifier";
  require_clean(*this, {raw, clean, split});
  Script s(*this, project_for(*this, "news"));
  s.open("classify news articles into five categories; gate test_accuracy >= 0.7");

  learners::CorpusOptions corpus_opts;
  corpus_opts.seed = options.seed;
  const auto corpus = s.guard("data-collection", [&] { return learners::synth_corpus(corpus_opts); });

  std::map<std::string, HashId> specs;
  s.guard("data-splitting", [&] {
    store().create_repo(raw);
    pipeline::PipelineSpec c;
    c.name = clean;
    c.inputs = {{raw, store::DataStore::kDefaultBranch}};
    c.transform = "clean_validate_text";
    c.params = {{"min_chars", 50}, {"extension", ".txt"}};
    c.trigger = pipeline::Trigger::kOnCommit;
    specs[clean] = pipelines().register_pipeline(c);
    pipeline::PipelineSpec sp;
    sp.name = split;
    sp.inputs = {{clean, store::DataStore::kDefaultBranch}};
    sp.transform = "split_dataset";
    sp.params = {{"train_fraction", "4/5"}, {"seed", options.seed}};
    sp.trigger = pipeline::Trigger::kOnCommit;
    specs[split] = pipelines().register_pipeline(sp);
  });
  s.enter("data-splitting", "train/test split defined as an on-commit pipeline", specs);

  const auto raw_commit = s.guard("data-ingestion", [&] {
    return store().commit_files(raw, store::DataStore::kDefaultBranch, corpus, s.actor(Role::kDataEngineer),
                                "ingest synthetic news corpus");
  });
  s.enter("data-ingestion", "", {{"commit", raw_commit.id}, {"files", corpus.size()}});

  const auto jobs = s.guard("data-versioning", [&] { return pipelines().run_pending(); });
  json job_ids = json::array();
  for (const auto& j : jobs) {
    if (j.status != pipeline::JobStatus::kSucceeded) {
      fail(ErrorCode::kTransformFailure, "use case stopped at step data-versioning: job " + j.id + " " + j.log);
    }
    job_ids.push_back(j.pipeline);
  }
  s.enter("data-versioning", "", {{"jobs", job_ids}});

  const auto clean_commit = s.guard("data-cleaning", [&] { return store().resolve(clean, "master"); });
  const auto clean_files = store().tree(clean_commit).size();
  s.enter("data-cleaning", "", {{"commit", clean_commit.id}, {"files", clean_files}});

  const auto split_commit = s.guard("data-validation", [&] { return store().resolve(split, "master"); });
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  for (const auto& [path, blob] : store().tree(split_commit)) {
    if (path.rfind("train/", 0) == 0) ++n_train;
    if (path.rfind("test/", 0) == 0) ++n_test;
  }
  s.guard("data-validation", [&] {
    if (n_train == 0 || n_test == 0) fail(ErrorCode::kEmptyDataset, "split produced an empty side");
  });
  s.enter("data-validation", "", {{"commit", split_commit.id}, {"train", n_train}, {"test", n_test}});

  const auto labelled = s.guard("data-labeling", [&] {
    const auto who = s.actor(Role::kDataLabeler);
    const auto a = labels().auto_label(split, split_commit.id, "train/", labels::Split::kTrain, who);
    const auto b = labels().auto_label(split, split_commit.id, "test/", labels::Split::kTest, who);
    return std::make_pair(a, b);
  });
  s.enter("data-labeling", "labels taken from the category directory",
          {{"train", labelled.first}, {"test", labelled.second}});

  s.enter("data-analysis", "category balance inspected");
  s.enter("data-preprocessing", "porter stemming and count vectorization inside the learner");
  s.enter("model-data-splitting", "a fixed fifth of train held out for validation");
  s.enter("model-building", "five linear layers with layer norm and dropout");

  const json data = {{"repo", split}, {"ref", split_commit.id}, {"split", "train"}, {"prefix", "train/"}};
  const auto search_id = s.guard("hp-optimization", [&] {
    return tracker().run_experiment(tracker::ExperimentConfig::from_json({
        {"name", "news-asha"},
        {"data", data},
        {"entry_point", "text-mlp-5"},
        {"hparams",
         {{"hidden", json::array({16, 32})},
          {"lr", {{"type", "float"}, {"lo", 0.02}, {"hi", 0.2}, {"scale", "log"}}},
          {"dropout", json::array({0.0, 0.1})},
          {"batch_size", 16},
          {"vocab_size", 2000}}},
        {"searcher",
         {{"name", "asha"}, {"min_resource", 25}, {"max_resource", 225}, {"reduction_factor", 3},
          {"max_trials", 9}, {"mode", "sync"}, {"seed", options.seed}}},
        {"seed", options.seed}}));
  });
  const auto best = s.guard("hp-optimization", [&] {
    const auto cp = tracker().best_checkpoint(search_id, "accuracy", true);
    return std::make_pair(cp, tracker().trial(search_id, cp.trial_id).hparams);
  });
  s.enter("hp-optimization", "", {{"experiment", search_id}, {"best_trial", best.first.trial_id}});

  const auto final_id = s.guard("model-training", [&] {
    return tracker().run_experiment(tracker::ExperimentConfig::from_json({{"name", "news-final"},
                                                                          {"data", data},
                                                                          {"entry_point", "text-mlp-5"},
                                                                          {"hparams", best.second},
                                                                          {"searcher", {{"name", "single"}, {"steps", 400}}},
                                                                          {"seed", options.seed}}));
  });
  s.enter("model-training", "", {{"experiment", final_id}});
  s.enter("experiment-evaluation", "validation accuracy compared against the search");

  tracker::DataSource test_source;
  test_source.repo = split;
  test_source.ref = split_commit.id;
  test_source.split = "test";
  test_source.prefix = "test/";
  auto outcome = release(*this, s, model, final_id, test_source);

  // Smoke predictions on the first test document of each category.
  std::vector<serving::Prediction> preds;
  std::vector<std::string> expected;
  s.guard("model-monitoring", [&] {
    std::set<std::string> seen;
    for (const auto& [path, blob] : store().tree(split_commit)) {
      if (path.rfind("test/", 0) != 0) continue;
      const auto rest = path.substr(5);
      const auto cat = rest.substr(0, rest.find('/'));
      if (!seen.insert(cat).second) continue;
      preds.push_back(gateway().predict(outcome.deployment, json{{"data", store().objects().get(blob)}}));
      expected.push_back(cat);
    }
  });
  const auto smoke = smoke_summary(preds, expected);
  s.enter("model-monitoring", "", {{"scoring_records", gateway().scoring(outcome.deployment).size()}});
  s.enter(workflow::kMaintenanceStep, "iteration complete");

  json report = outcome.report;
  report["use_case"] = "news";
  report["seed"] = options.seed;
  report["project"] = s.project().name;
  report["commits"] = {{"raw", raw_commit.id}, {"clean", clean_commit.id}, {"split", split_commit.id}};
  report["spec_hashes"] = specs;
  report["documents"] = {{"raw", corpus.size()}, {"clean", clean_files}, {"train", n_train}, {"test", n_test}};
  report["labels"] = {{"train", labelled.first}, {"test", labelled.second}};
  report["experiments"] = {{"search", search_id}, {"final", final_id}};
  report["best_hparams"] = best.second;
  report["smoke"] = smoke;
  report["workflow_steps"] = s.steps();
  return report;
}

json Context::run_fashion(const UseCaseOptions& options) {
  const std::string repo = "fashion-data";
  const std::string model = "fashion-classifier";
  require_clean(*this, {repo});
  Script s(*this, project_for(*this, "fashion"));
  s.open("classify 28x28 fashion images into ten classes; gate test_accuracy >= 0.7");

  const auto images = s.guard("data-collection", [&] {
    return std::make_pair(learners::synth_images(10, 100, options.seed),
                          learners::synth_images(10, 20, options.seed ^ 0x74657374ULL));
  });
  std::string classes;
  for (const auto* name : learners::kFashionClasses) classes += std::string(name) + "\n";
  const std::map<std::string, std::string> files = {
      {"train/images.idx3", learners::encode_idx_images(images.first)},
      {"train/labels.idx1", learners::encode_idx_labels(images.first)},
      {"train/classes.txt", classes},
      {"test/images.idx3", learners::encode_idx_images(images.second)},
      {"test/labels.idx1", learners::encode_idx_labels(images.second)},
      {"test/classes.txt", classes},
  };
  s.enter("data-splitting", "generated as separate train and test sets",
          {{"train", images.first.size()}, {"test", images.second.size()}});

  const auto commit = s.guard("data-ingestion", [&] {
    store().create_repo(repo);
    return store().commit_files(repo, store::DataStore::kDefaultBranch, files, s.actor(Role::kDataEngineer),
                                "ingest synthetic fashion images");
  });
  s.enter("data-ingestion", "", {{"commit", commit.id}});
  s.enter("data-versioning", "manual commit without a producing pipeline", {{"commit", commit.id}});
  s.enter("data-cleaning", "fixed-size images need no cleaning");
  s.guard("data-validation", [&] {
    for (const char* side : {"train/", "test/"}) {
      const auto decoded = learners::decode_idx(store().read_file(repo, commit.id, std::string(side) + "images.idx3"),
                                                store().read_file(repo, commit.id, std::string(side) + "labels.idx1"));
      if (decoded.empty()) fail(ErrorCode::kEmptyDataset, std::string("no images under ") + side);
    }
  });
  s.enter("data-validation", "IDX headers and counts verified");
  s.enter("data-labeling", "labels ship in the IDX label files");
  s.enter("data-analysis", "class balance inspected");

  // 0..255 maps onto 0..1 exactly at both ends.
  std::vector<uint8_t> probe(learners::kImagePixels, 0);
  probe[1] = 255;
  const auto scaled = learners::image_features(probe);
  const json normalization = {{"0", scaled[0]}, {"255", scaled[1]}, {"exact", scaled[0] == 0.0 && scaled[1] == 1.0}};
  s.enter("data-preprocessing", "flatten and divide by 255", normalization);
  s.enter("model-data-splitting", "a fixed fifth of train held out for validation");
  s.enter("model-building", "flatten, one hidden layer, ten outputs");

  const json data = {{"repo", repo}, {"ref", commit.id}, {"split", "train"}, {"prefix", "train/"}};
  const auto search_id = s.guard("hp-optimization", [&] {
    return tracker().run_experiment(tracker::ExperimentConfig::from_json(
        {{"name", "fashion-grid"},
         {"data", data},
         {"entry_point", "image-mlp"},
         {"hparams", {{"hidden", json::array({32, 64})}, {"lr", json::array({0.05, 0.1})}, {"batch_size", 32}}},
         {"searcher", {{"name", "grid"}, {"steps", 100}}},
         {"seed", options.seed}}));
  });
  const auto best = s.guard("hp-optimization", [&] {
    const auto cp = tracker().best_checkpoint(search_id, "accuracy", true);
    return std::make_pair(cp, tracker().trial(search_id, cp.trial_id).hparams);
  });
  s.enter("hp-optimization", "", {{"experiment", search_id}, {"best_trial", best.first.trial_id}});

  const auto final_id = s.guard("model-training", [&] {
    return tracker().run_experiment(tracker::ExperimentConfig::from_json({{"name", "fashion-final"},
                                                                          {"data", data},
                                                                          {"entry_point", "image-mlp"},
                                                                          {"hparams", best.second},
                                                                          {"searcher", {{"name", "single"}, {"steps", 300}}},
                                                                          {"seed", options.seed}}));
  });
  s.enter("model-training", "", {{"experiment", final_id}});
  s.enter("experiment-evaluation", "validation accuracy compared against the grid");

  tracker::DataSource test_source;
  test_source.repo = repo;
  test_source.ref = commit.id;
  test_source.split = "test";
  test_source.prefix = "test/";
  auto outcome = release(*this, s, model, final_id, test_source);

  std::vector<serving::Prediction> preds;
  std::vector<std::string> expected;
  s.guard("model-monitoring", [&] {
    for (int c = 0; c < 10; ++c) {
      const auto it = std::find_if(images.second.begin(), images.second.end(),
                                   [&](const learners::Image& im) { return im.label == c; });
      json rows = json::array();
      for (int r = 0; r < learners::kImageSide; ++r) {
        json row = json::array();
        for (int col = 0; col < learners::kImageSide; ++col) row.push_back(it->pixels[r * learners::kImageSide + col]);
        rows.push_back(row);
      }
      preds.push_back(gateway().predict(outcome.deployment, json{{"data", rows}}));
      expected.push_back(learners::kFashionClasses[c]);
    }
  });
  auto smoke = smoke_summary(preds, expected);
  smoke["valid_classes"] = std::all_of(preds.begin(), preds.end(), [](const serving::Prediction& p) {
    return std::find(learners::kFashionClasses.begin(), learners::kFashionClasses.end(), p.label) !=
           learners::kFashionClasses.end();
  });
  s.enter("model-monitoring", "", {{"scoring_records", gateway().scoring(outcome.deployment).size()}});
  s.enter(workflow::kMaintenanceStep, "iteration complete");

  json report = outcome.report;
  report["use_case"] = "fashion";
  report["seed"] = options.seed;
  report["project"] = s.project().name;
  report["commits"] = {{"data", commit.id}};
  report["images"] = {{"train", images.first.size()}, {"test", images.second.size()}};
  report["normalization"] = normalization;
  report["experiments"] = {{"search", search_id}, {"final", final_id}};
  report["best_hparams"] = best.second;
  report["smoke"] = smoke;
  report["workflow_steps"] = s.steps();
  return report;
}

}  // namespace dlflow::app
