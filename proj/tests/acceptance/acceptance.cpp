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

// End-to-end acceptance checks. Prints one PASS or FAIL line per criterion
// and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "app/context.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "learners/mlp.hpp"
#include "learners/porter_stemmer.hpp"
#include "learners/synth.hpp"
#include "learners/synthetic_curve.hpp"
#include "pipeline/pipeline_engine.hpp"
#include "registry/model_registry.hpp"
#include "workflow/workflow.hpp"
#include "test_util.hpp"

namespace dlflow::acceptance {
namespace {

using testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Results of the scripted use cases, shared by several criteria.
struct Runs {
  TempDir news_a, news_b, fashion_a, fashion_b;
  std::unique_ptr<app::Context> news, news_again, fashion, fashion_again;
  json news_report, news_report_again, fashion_report, fashion_report_again;
  double news_seconds = 0;

  Runs() {
    const auto t0 = std::chrono::steady_clock::now();
    news = std::make_unique<app::Context>(testing::deterministic_options(news_a.path()));
    news_report = news->run_use_case("news");
    news_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    news_again = std::make_unique<app::Context>(testing::deterministic_options(news_b.path()));
    news_report_again = news_again->run_use_case("news");
    fashion = std::make_unique<app::Context>(testing::deterministic_options(fashion_a.path()));
    fashion_report = fashion->run_use_case("fashion");
    fashion_again = std::make_unique<app::Context>(testing::deterministic_options(fashion_b.path()));
    fashion_report_again = fashion_again->run_use_case("fashion");
  }
};

Runs& runs() {
  static Runs r;
  return r;
}

Outcome news_use_case() {
  auto& r = runs();
  const double acc = r.news_report.at("test_accuracy").get<double>();
  const auto& dep = r.news->gateway().deployment(r.news_report.at("deployment").get<std::string>());
  const bool deployed = dep.model_version == r.news_report.at("model_version").get<int>();
  const bool docs = r.news_report.at("documents").at("raw") == 500;
  return {acc >= 0.7 && r.news_seconds < 300 && deployed && docs,
          "test_accuracy=" + fmt(acc) + " runtime=" + fmt(r.news_seconds) + "s"};
}

Outcome fashion_use_case() {
  auto& r = runs();
  const double acc = r.fashion_report.at("test_accuracy").get<double>();
  const auto& images = r.fashion_report.at("images");
  const auto& norm = r.fashion_report.at("normalization");
  const bool exact = norm.at("0").get<double>() == 0.0 && norm.at("255").get<double>() == 1.0 &&
                     norm.at("exact").get<bool>();
  const bool sizes = images.at("train") == 1000 && images.at("test") == 200;
  return {acc >= 0.7 && exact && sizes, "test_accuracy=" + fmt(acc) + " normalization exact=" + (exact ? "yes" : "no")};
}

Outcome lineage() {
  auto& r = runs();
  const auto t = r.news->trace(r.news_report.at("model").get<std::string>(), r.news_report.at("model_version").get<int>());
  const std::string raw = r.news_report.at("commits").at("raw");
  const auto history = r.news->store().log("news-raw", "master");
  const bool ingestion = !history.empty() && history.back().id == raw;
  const bool traced = t.at("raw_commits") == json::array({raw}) && t.at("chain").back().at("commit") == raw &&
                      t.at("chain").back().at("pipeline").is_null();
  bool digests = t.at("digest_match").get<bool>();
  int datasets = 0;
  for (const auto& node : t.at("chain")) {
    if (node.at("kind") != "dataset") continue;
    ++datasets;
    digests = digests && node.at("digest") == node.at("recomputed_digest");
  }
  return {ingestion && traced && digests && datasets > 0 && t.at("depth").get<int>() >= 4,
          "depth=" + std::to_string(t.at("depth").get<int>()) + " raw=" + raw.substr(0, 12)};
}

json repo_heads(app::Context& ctx) {
  json out = json::object();
  for (const auto& repo : ctx.store().list_repos()) {
    for (const auto& [branch, head] : repo.branches) {
      json ids = json::array();
      if (head) {
        for (const auto& c : ctx.store().log(repo.name, branch)) ids.push_back(c.id);
      }
      out[repo.name + "@" + branch] = ids;
    }
  }
  return out;
}

Outcome reproducibility() {
  auto& r = runs();
  const auto weights = [](app::Context& ctx, const json& report) {
    return ctx.tracker().checkpoint(report.at("checkpoint").get<std::string>()).artifacts.at("weights");
  };
  const bool reports = r.news_report.dump() == r.news_report_again.dump() &&
                       r.fashion_report.dump() == r.fashion_report_again.dump();
  const bool commits = repo_heads(*r.news) == repo_heads(*r.news_again) &&
                       repo_heads(*r.fashion) == repo_heads(*r.fashion_again);
  const bool digests = weights(*r.news, r.news_report) == weights(*r.news_again, r.news_report_again) &&
                       weights(*r.fashion, r.fashion_report) == weights(*r.fashion_again, r.fashion_report_again);
  return {reports && commits && digests, std::string("reports ") + (reports ? "equal" : "differ") + ", commits " +
                                             (commits ? "equal" : "differ") + ", weights " +
                                             (digests ? "equal" : "differ")};
}

// Sequential successive halving over table[trial][rung]; ties go to the
// lower trial index.
struct HalvingResult {
  std::vector<std::vector<int>> rungs;
  std::vector<std::array<int, 3>> promotions;
  int best = -1;
};

HalvingResult successive_halving(const std::vector<std::vector<double>>& table, int eta, int top_rung) {
  HalvingResult out;
  std::vector<int> population(table.size());
  for (std::size_t i = 0; i < population.size(); ++i) population[i] = static_cast<int>(i);
  for (int k = 0; k <= top_rung; ++k) {
    auto sorted = population;
    std::sort(sorted.begin(), sorted.end());
    out.rungs.push_back(sorted);
    std::stable_sort(population.begin(), population.end(), [&](int a, int b) {
      const double ma = table[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
      const double mb = table[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
      return ma != mb ? ma > mb : a < b;
    });
    if (k == top_rung) {
      out.best = population.front();
      break;
    }
    population.resize(population.size() / static_cast<std::size_t>(eta));
    for (int t : population) out.promotions.push_back({t, k, k + 1});
  }
  return out;
}

Outcome asha_vs_oracle() {
  TempDir dir;
  store::DataStore store(dir.path(), Clock(true, Clock::kDefaultEpoch));
  labels::LabelStore labels(store);
  tracker::ExperimentTracker tracker(store, labels, learners::LearnerRegistry::with_builtins());
  store.create_repo("data");
  store.commit_files("data", "master", {{"x.txt", "x"}}, "sam", "");
  const auto id = tracker.run_experiment(tracker::ExperimentConfig::from_json(
      {{"name", "asha-check"},
       {"data", {{"repo", "data"}}},
       {"entry_point", "synthetic-curve"},
       {"hparams", {{"a", {{"type", "float"}, {"lo", 0.3}, {"hi", 1.0}}}, {"b", {{"type", "float"}, {"lo", 0.02}, {"hi", 1.0}}}}},
       {"searcher",
        {{"name", "asha"}, {"min_resource", 1}, {"max_resource", 9}, {"reduction_factor", 3}, {"max_trials", 9},
         {"mode", "sync"}, {"seed", 11}}},
       {"seed", 5}}));
  const auto trials = tracker.trials(id);
  const std::vector<int64_t> resources{1, 3, 9};
  std::vector<std::vector<double>> table(trials.size());
  std::map<std::string, int> index;
  for (const auto& t : trials) {
    const int i = std::stoi(t.trial_id) - 1;
    index[t.trial_id] = i;
    for (auto res : resources) {
      table.at(static_cast<std::size_t>(i))
          .push_back(learners::SyntheticCurveLearner::accuracy_at(t.hparams.at("a").get<double>(),
                                                                   t.hparams.at("b").get<double>(), res));
    }
  }
  const auto want = successive_halving(table, 3, 2);

  const auto search = tracker.experiment(id).at("search");
  std::vector<std::vector<int>> rungs;
  for (const auto& rung : search.at("rungs")) {
    std::vector<int> pop;
    for (const auto& e : rung.at("completed")) pop.push_back(index.at(e.at("trial").get<std::string>()));
    std::sort(pop.begin(), pop.end());
    rungs.push_back(pop);
  }
  std::vector<std::array<int, 3>> promotions;
  for (const auto& p : search.at("promotions")) {
    promotions.push_back({index.at(p.at("trial").get<std::string>()), p.at("from").get<int>(), p.at("to").get<int>()});
  }
  const auto& top = search.at("rungs").back().at("completed");
  int best = -1;
  double best_metric = -1;
  for (const auto& e : top) {
    const int t = index.at(e.at("trial").get<std::string>());
    const double m = e.at("metric").get<double>();
    if (best < 0 || m > best_metric || (m == best_metric && t < best)) {
      best = t;
      best_metric = m;
    }
  }
  const bool ok = trials.size() == 9 && rungs == want.rungs && promotions == want.promotions && best == want.best;
  return {ok, "rungs=" + std::to_string(rungs.size()) + " promotions=" + std::to_string(promotions.size()) +
                  " best=" + std::to_string(best) + " oracle_best=" + std::to_string(want.best)};
}

Outcome gradient_check() {
  Rng rng(20240601);
  double worst_overall = 0;
  const double h = 1e-5;
  for (int n = 0; n < 50; ++n) {
    learners::MlpSpec spec;
    const auto layers = 1 + rng.uniform_index(3);
    for (uint64_t l = 0; l <= layers; ++l) spec.dims.push_back(1 + rng.uniform_index(7));
    spec.dims.back() = 2 + rng.uniform_index(4);
    spec.layer_norm = rng.bernoulli(0.5);
    spec.dropout = rng.bernoulli(0.5) ? 0.3 : 0.0;
    learners::Mlp net(spec);
    net.init(rng);
    for (auto& p : net.params()) p += 0.2 * (rng.uniform01() - 0.5);
    std::vector<std::vector<double>> inputs(1 + rng.uniform_index(4), std::vector<double>(spec.dims.front()));
    std::vector<learners::Example> batch;
    for (auto& x : inputs) {
      for (auto& v : x) v = rng.uniform(-1, 1);
      batch.push_back({x, static_cast<int>(rng.uniform_index(spec.dims.back()))});
    }
    std::vector<double> grad(net.params().size());
    net.gradient(batch, grad, nullptr);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double keep = net.params()[i];
      net.params()[i] = keep + h;
      const double up = net.loss(batch);
      net.params()[i] = keep - h;
      const double down = net.loss(batch);
      net.params()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
      const double rel = std::abs(numeric - grad[i]) / denom;
      worst_overall = std::max(worst_overall, rel);
    }
  }
  return {worst_overall < 1e-4, "50 networks, max relative error=" + fmt(worst_overall)};
}

Outcome porter() {
  std::ifstream in(testing::fixture("porter.tsv"));
  std::string word, stem;
  int total = 0, agree = 0;
  while (in >> word >> stem) {
    ++total;
    agree += learners::porter_stem(word) == stem;
  }
  return {total >= 100 && agree == total, std::to_string(agree) + "/" + std::to_string(total) + " words"};
}

Outcome governance() {
  const auto project = governance::Project::standard("acceptance");
  std::map<governance::Role, std::string> actor_of;
  for (const auto& [actor, role] : project.actors) actor_of.emplace(role, actor);
  const auto owner = [&](const std::string& step) {
    const auto& s = workflow::StepGraph::standard().step(step);
    return s.owner ? actor_of.at(*s.owner) : std::string("dana");
  };

  TempDir dir;
  Rng rng(31337);
  bool ok = true;
  std::size_t rejected = 0;

  workflow::WorkflowEngine engine(dir.path() / "wf", Clock(true, Clock::kDefaultEpoch));
  engine.start(project, "dana");
  const auto& g = workflow::StepGraph::standard();
  for (int i = 0; i < 1000; ++i) {
    const auto cur = engine.run(project.name).current_step;
    const auto& target = g.steps()[rng.uniform_index(g.steps().size())].id;
    const auto code = code_of([&] { engine.advance(project, target, owner(target)); });
    const bool legal = g.edge(cur, target) != nullptr;
    ok = ok && (legal ? code == ErrorCode::kOk : code == ErrorCode::kIllegalTransition);
    rejected += !legal;
    if (!legal && rng.bernoulli(0.5)) {
      const auto next = g.successors(engine.run(project.name).current_step);
      const auto& pick = next[rng.uniform_index(next.size())];
      engine.advance(project, pick, owner(pick));
    }
  }
  const auto run = engine.run(project.name);
  for (std::size_t i = 1; i < run.history.size(); ++i) {
    ok = ok && g.edge(run.history[i - 1].step, run.history[i].step) != nullptr;
  }

  store::DataStore store(dir.path() / "store", Clock(true, Clock::kDefaultEpoch));
  labels::LabelStore labels(store);
  tracker::ExperimentTracker tracker(store, labels, learners::LearnerRegistry::with_builtins());
  registry::ModelRegistry reg(store, tracker, project);
  store.create_repo("data");
  store.commit_files("data", "master", {{"x.txt", "x"}}, "dana", "");
  const auto exp = tracker.run_experiment(tracker::ExperimentConfig::from_json(
      {{"name", "curve"}, {"data", {{"repo", "data"}}}, {"entry_point", "synthetic-curve"},
       {"hparams", {{"a", 0.9}}}, {"searcher", {{"name", "single"}, {"steps", 3}}}}));
  const auto cp = tracker.best_checkpoint(exp, "accuracy", true).id;

  const auto v1 = reg.register_model({"gate", cp, "", "", "sam", "", {}});
  reg.attach_test_metrics("gate", v1.version, {{"test_accuracy", 0.69}});
  const bool low_fails = code_of([&] { reg.submit("gate", v1.version, "sam"); }) == ErrorCode::kGateFailed;
  const auto v2 = reg.register_model({"gate", cp, "", "", "sam", "", {}});
  reg.attach_test_metrics("gate", v2.version, {{"test_accuracy", 0.70}});
  const bool boundary_passes = code_of([&] { reg.submit("gate", v2.version, "sam"); }) == ErrorCode::kOk;
  const bool self_review = code_of([&] { reg.review("gate", v2.version, true, "sam"); }) == ErrorCode::kSelfReviewDenied;

  const std::vector<std::string> names{"alpha", "beta"};
  const std::vector<std::string> actors{"dana", "lee", "sam", "val", "ops", "sol", "nobody"};
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& name = names[rng.uniform_index(names.size())];
    const auto existing = code_of([&] { (void)reg.versions(name); }) == ErrorCode::kOk ? reg.versions(name).size() : 0;
    const int v = static_cast<int>(1 + rng.uniform_index(std::max<std::size_t>(existing, 1)));
    const auto& actor = actors[rng.uniform_index(actors.size())];
    const auto code = code_of([&] {
      switch (rng.uniform_index(6)) {
        case 0: reg.register_model({name, cp, "", "", actor, "", {}}); break;
        case 1: reg.attach_test_metrics(name, v, {{"test_accuracy", rng.uniform(0.6, 0.8)}}); break;
        case 2: reg.submit(name, v, actor); break;
        case 3: reg.review(name, v, rng.bernoulli(0.7), actor); break;
        default: reg.promote_to_production(name, v, actor); break;
      }
    });
    accepted += code == ErrorCode::kOk;
    for (const auto& n : names) {
      if (code_of([&] { (void)reg.versions(n); }) != ErrorCode::kOk) continue;
      int production = 0;
      for (const auto& mv : reg.versions(n)) {
        production += mv.stage == registry::Stage::kProduction;
        auto at = registry::Stage::kRegistered;
        std::string submitter;
        for (const auto& ev : mv.history) {
          if (ev.to == registry::Stage::kSubmitted) submitter = ev.actor;
          ok = ok && ev.from == at &&
               (registry::is_allowed_transition(ev.from, ev.to) || (ev.automatic && ev.to == registry::Stage::kApproved));
          if (!ev.automatic && ev.to == registry::Stage::kApproved) ok = ok && !ev.actor.empty() && ev.actor != submitter;
          at = ev.to;
        }
        ok = ok && at == mv.stage;
      }
      ok = ok && production <= 1;
    }
  }
  ok = ok && low_fails && boundary_passes && self_review && rejected > 0;
  return {ok, "workflow illegal attempts rejected=" + std::to_string(rejected) +
                  ", registry ops accepted=" + std::to_string(accepted) + "/1000"};
}

Outcome serving_consistency() {
  auto& r = runs();
  Rng rng(99);
  const auto check = [&](app::Context& ctx, const json& report, const std::function<json()>& make, int n, bool& ok) {
    const std::string dep = report.at("deployment");
    const auto offline = ctx.tracker().restore_learner(ctx.tracker().checkpoint(report.at("checkpoint").get<std::string>()));
    const auto before = ctx.gateway().scoring(dep).size();
    std::size_t requests = 0;
    for (int i = 0; i < n; ++i) {
      const json data = make();
      ++requests;
      const auto p = ctx.gateway().predict(dep, json{{"data", data}});
      ok = ok && p.scores == offline->predict_scores(data);
    }
    for (const char* bad : {"{broken", "[]", R"({"data": null})", R"({"data": {"x": 1}})", R"({"other": 1})"}) {
      ++requests;
      ok = ok && code_of([&] { ctx.gateway().predict(dep, std::string_view(bad)); }) == ErrorCode::kMalformedPayload;
    }
    ok = ok && ctx.gateway().scoring(dep).size() == before + requests;
    return requests;
  };

  const std::vector<std::string> words{"market", "shares", "profit", "election", "minister", "football", "tennis",
                                       "film", "album", "software", "internet", "phones", "the", "a", "rallied",
                                       "government", "awards", "network", "championship", "xyzzy"};
  bool ok = true;
  std::size_t total = 0;
  total += check(*r.news, r.news_report, [&] {
    std::string text;
    const auto len = 1 + rng.uniform_index(30);
    for (uint64_t i = 0; i < len; ++i) text += words[rng.uniform_index(words.size())] + " ";
    return json(text);
  }, 50, ok);
  total += check(*r.fashion, r.fashion_report, [&] {
    std::vector<int> pixels(784);
    for (auto& p : pixels) p = static_cast<int>(rng.uniform_index(256));
    return json(pixels);
  }, 50, ok);
  return {ok, "100 random inputs bit-identical, " + std::to_string(total) + " requests logged"};
}

Outcome split_stability() {
  TempDir dir;
  store::DataStore store(dir.path(), Clock(true, Clock::kDefaultEpoch));
  pipeline::PipelineEngine engine(store, pipeline::TransformRegistry::with_builtins());
  store.create_repo("corpus");
  std::map<std::string, std::string> files;
  for (int i = 0; i < 10000; ++i) files["docs/" + std::to_string(i) + ".txt"] = "document " + std::to_string(i);
  store.commit_files("corpus", "master", files, "dana", "base");
  pipeline::PipelineSpec spec;
  spec.name = "split";
  spec.inputs = {{"corpus", "master"}};
  spec.transform = "split_dataset";
  spec.params = {{"train_fraction", 0.8}, {"seed", 17}};
  engine.register_pipeline(spec);

  const auto partition = [&](const pipeline::Job& job) {
    std::map<std::string, bool> out;
    for (const auto& [path, blob] : store.tree(store.resolve("split", *job.output_commit))) {
      if (path.rfind("train/", 0) == 0) out[path.substr(6)] = true;
      if (path.rfind("test/", 0) == 0) out[path.substr(5)] = false;
    }
    return out;
  };
  const auto before = partition(engine.run_job("split"));
  std::map<std::string, std::string> more;
  for (int i = 10000; i < 12000; ++i) more["docs/" + std::to_string(i) + ".txt"] = "document " + std::to_string(i);
  store.commit_files("corpus", "master", more, "dana", "growth", {.overlay = true});
  const auto after = partition(engine.run_job("split"));

  std::size_t train = 0, moved = 0;
  for (const auto& [path, is_train] : before) {
    train += is_train;
    const auto it = after.find(path);
    moved += it == after.end() || it->second != is_train;
  }
  const double fraction = static_cast<double>(train) / static_cast<double>(before.size());
  const bool ok = before.size() == 10000 && after.size() == 12000 && moved == 0 && std::abs(fraction - 0.8) <= 0.012;
  return {ok, "train fraction=" + fmt(fraction) + " rerouted=" + std::to_string(moved)};
}

}  // namespace
}  // namespace dlflow::acceptance

int main() {
  using namespace dlflow::acceptance;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"news use case end to end", news_use_case},
      {"fashion use case end to end", fashion_use_case},
      {"lineage trace to raw ingestion", lineage},
      {"reproducible runs", reproducibility},
      {"asha matches successive halving", asha_vs_oracle},
      {"mlp gradient check", gradient_check},
      {"porter stemmer agreement", porter},
      {"governance properties", governance},
      {"serving consistency", serving_consistency},
      {"split stability", split_stability},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", n - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
