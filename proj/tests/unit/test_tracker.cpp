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

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "learners/synthetic_curve.hpp"
#include "tracker/asha.hpp"
#include "tracker/experiment_tracker.hpp"
#include "test_util.hpp"

namespace dlflow::tracker {
namespace {

using testing::TempDir;
using Action = AshaScheduler::Action;

// Drives the scheduler with one worker, answering each training request
// from a fixed metric table.
void replay(AshaScheduler& s, const std::vector<std::vector<double>>& table) {
  for (int guard = 0; guard < 10000; ++guard) {
    const auto d = s.decide();
    if (d.action == Action::kHalt) return;
    ASSERT_NE(d.action, Action::kWait);
    s.report(d.trial, d.rung, table.at(static_cast<std::size_t>(d.trial)).at(static_cast<std::size_t>(d.rung)));
  }
  FAIL() << "scheduler did not halt";
}

TEST(Hparams, ParsesAllDomainForms) {
  const auto space = HyperparameterSpace::from_json(
      {{"a", 3}, {"b", {1, 2}}, {"c", {{"type", "int"}, {"lo", 1}, {"hi", 4}}},
       {"d", {{"type", "float"}, {"lo", 0.001}, {"hi", 1.0}, {"scale", "log"}}}});
  EXPECT_FALSE(space.is_fixed());
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto s = space.sample(rng);
    EXPECT_EQ(s.at("a"), 3);
    EXPECT_GE(s.at("c").get<int>(), 1);
    EXPECT_LE(s.at("c").get<int>(), 4);
    EXPECT_GE(s.at("d").get<double>(), 0.001);
    EXPECT_LE(s.at("d").get<double>(), 1.0);
  }
  EXPECT_THROW(space.grid(), Error);
  for (const json& bad : {json{{"x", {{"type", "int"}, {"lo", 3}, {"hi", 3}}}},
                          json{{"x", {{"type", "float"}, {"lo", 0.0}, {"hi", 1.0}, {"scale", "log"}}}},
                          json{{"x", json::array()}}}) {
    EXPECT_THROW(HyperparameterSpace::from_json(bad), Error) << bad.dump();
  }
}

TEST(Hparams, GridIsCartesianProduct) {
  const auto space = HyperparameterSpace::from_json({{"a", {1, 2}}, {"b", {"x", "y"}}});
  const auto g = space.grid();
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], (json{{"a", 1}, {"b", "x"}}));
  EXPECT_EQ(g[1], (json{{"a", 1}, {"b", "y"}}));
  EXPECT_EQ(g[3], (json{{"a", 2}, {"b", "y"}}));
}

TEST(Asha, PromotesTopOfThree) {
  AshaScheduler s({9, 1, 3, 9, true}, true);
  std::vector<int> started;
  for (double m : {0.9, 0.5, 0.4}) {
    const auto d = s.decide();
    ASSERT_EQ(d.action, Action::kStartNew);
    started.push_back(d.trial);
    s.report(d.trial, 0, m);
  }
  EXPECT_EQ(s.top_k(0), std::vector<int>{started[0]});
}

TEST(Asha, FloorRuleStartsNewConfig) {
  AshaScheduler s({9, 1, 3, 9, false}, true);
  for (double m : {0.9, 0.5}) {
    const auto d = s.decide();
    ASSERT_EQ(d.action, Action::kStartNew);
    s.report(d.trial, 0, m);
  }
  EXPECT_TRUE(s.top_k(0).empty());
  EXPECT_EQ(s.decide().action, Action::kStartNew);
}

TEST(Asha, ResourcesFollowGeometricLadder) {
  AshaScheduler s({10, 2, 2, 8, true}, true);
  EXPECT_EQ(s.top_rung(), 2);
  EXPECT_EQ(s.resource(0), 2);
  EXPECT_EQ(s.resource(1), 4);
  EXPECT_EQ(s.resource(2), 10);
  AshaParams bad{9, 10, 3, 9, true};
  EXPECT_THROW(bad.validate(), Error);
  bad = {9, 1, 1, 9, true};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Asha, MatchesSuccessiveHalvingOracle) {
  const json cases = read_json(testing::fixture("asha_oracle.json"));
  ASSERT_EQ(cases.size(), 3u);
  for (const auto& c : cases) {
    const auto table = c.at("table").get<std::vector<std::vector<double>>>();
    AshaParams p{c.at("max_resource").get<int64_t>(), c.at("min_resource").get<int64_t>(),
                 c.at("eta").get<int64_t>(), static_cast<int64_t>(table.size()), true};
    AshaScheduler s(p, c.at("maximize").get<bool>());
    replay(s, table);
    const auto& want = c.at("expected");
    ASSERT_EQ(s.top_rung(), want.at("top_rung").get<int>());
    for (int k = 0; k <= s.top_rung(); ++k) {
      std::vector<int> pop;
      for (const auto& [t, m] : s.rungs()[static_cast<std::size_t>(k)]) pop.push_back(t);
      std::sort(pop.begin(), pop.end());
      EXPECT_EQ(pop, want.at("rungs").at(static_cast<std::size_t>(k)).get<std::vector<int>>()) << "rung " << k;
    }
    std::vector<json> promos;
    for (const auto& pr : s.promotions()) promos.push_back({{"trial", pr.trial}, {"from", pr.from}, {"to", pr.to}});
    EXPECT_EQ(json(promos), want.at("promotions"));
    const auto& top = s.rungs()[static_cast<std::size_t>(s.top_rung())];
    ASSERT_FALSE(top.empty());
    auto best = top.front();
    for (const auto& e : top) {
      const bool better = c.at("maximize").get<bool>() ? e.second > best.second : e.second < best.second;
      if (better || (e.second == best.second && e.first < best.first)) best = e;
    }
    EXPECT_EQ(best.first, want.at("best").get<int>());
  }
}

TEST(Asha, NeverTrainsPastMaxResource) {
  AshaScheduler s({27, 1, 3, 27, true}, false);
  for (;;) {
    const auto d = s.decide();
    if (d.action == Action::kHalt) break;
    ASSERT_LE(s.resource(d.rung), 27);
    s.report(d.trial, d.rung, 1.0 / (1 + d.trial));
  }
  EXPECT_EQ(s.trials_created(), 27);
}

TEST(Asha, ErroredTrialsAreSkipped) {
  AshaScheduler s({9, 1, 3, 3, true}, true);
  int errored = -1;
  for (;;) {
    const auto d = s.decide();
    if (d.action == Action::kHalt) break;
    if (errored < 0) {
      errored = d.trial;
      s.report_error(d.trial);
      continue;
    }
    s.report(d.trial, d.rung, 0.5 + 0.1 * d.trial);
  }
  EXPECT_TRUE(s.errored(errored));
  EXPECT_EQ(s.completed_rung(errored), -1);
}

class TrackerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store.create_repo("data");
    store.commit_files("data", "master", {{"x.txt", "anything"}}, "sam", "");
  }
  ExperimentConfig config(json hparams, json searcher) {
    return ExperimentConfig::from_json({{"name", "curve"},
                                        {"data", {{"repo", "data"}}},
                                        {"entry_point", "synthetic-curve"},
                                        {"hparams", std::move(hparams)},
                                        {"searcher", std::move(searcher)},
                                        {"seed", 4}});
  }
  TempDir dir;
  store::DataStore store{dir.path(), Clock(true, Clock::kDefaultEpoch)};
  labels::LabelStore labels{store};
  ExperimentTracker tracker{store, labels, learners::LearnerRegistry::with_builtins()};
};

TEST_F(TrackerTest, SingleTrialCompletes) {
  const auto id = tracker.run_experiment(config({{"a", 0.8}, {"b", 0.3}}, {{"name", "single"}, {"steps", 10}}));
  const auto trials = tracker.trials(id);
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_EQ(trials[0].state, TrialState::kCompleted);
  EXPECT_EQ(trials[0].trial_id, "0001");
  const auto best = tracker.best_checkpoint(id, "accuracy", true);
  EXPECT_EQ(best.id, trials[0].checkpoints.back());
  EXPECT_DOUBLE_EQ(best.metrics.at("accuracy"), learners::SyntheticCurveLearner::accuracy_at(0.8, 0.3, 10));
}

TEST_F(TrackerTest, GridRunsEveryAssignmentAndPicksBest) {
  const auto id = tracker.run_experiment(config({{"a", {0.6, 0.8}}, {"b", {0.1, 0.2}}}, {{"name", "grid"}, {"steps", 5}}));
  const auto trials = tracker.trials(id);
  ASSERT_EQ(trials.size(), 4u);
  EXPECT_EQ(trials[3].hparams, (json{{"a", 0.8}, {"b", 0.2}}));
  EXPECT_EQ(tracker.best_checkpoint(id, "accuracy", true).trial_id, "0004");
  EXPECT_EQ(tracker.best_checkpoint(id, "loss", false).trial_id, "0004");
  EXPECT_EQ(tracker.best_checkpoint(id, "accuracy", false).trial_id, "0001");
}

TEST_F(TrackerTest, TiesGoToLowestTrial) {
  const auto id = tracker.run_experiment(config({{"a", {0.7, 0.7}}, {"b", 0.2}}, {{"name", "grid"}, {"steps", 5}}));
  EXPECT_EQ(tracker.best_checkpoint(id, "accuracy", true).trial_id, "0001");
}

TEST_F(TrackerTest, RandomSearchIsSeeded) {
  const json space = {{"a", {{"type", "float"}, {"lo", 0.1}, {"hi", 1.0}}}, {"b", 0.2}};
  const json searcher = {{"name", "random"}, {"n", 5}, {"seed", 9}, {"steps", 3}};
  const auto one = tracker.trials(tracker.run_experiment(config(space, searcher)));
  const auto two = tracker.trials(tracker.run_experiment(config(space, searcher)));
  ASSERT_EQ(one.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(one[i].hparams, two[i].hparams);
}

TEST_F(TrackerTest, AshaSummaryAndStates) {
  const json space = {{"a", {{"type", "float"}, {"lo", 0.2}, {"hi", 1.0}}}, {"b", {{"type", "float"}, {"lo", 0.05}, {"hi", 0.5}}}};
  const auto id = tracker.run_experiment(
      config(space, {{"name", "asha"}, {"min_resource", 1}, {"max_resource", 9}, {"reduction_factor", 3}, {"max_trials", 9}}));
  const auto exp = tracker.experiment(id);
  EXPECT_EQ(exp.at("search").at("rungs").size(), 3u);
  int completed = 0, stopped = 0;
  for (const auto& t : tracker.trials(id)) {
    EXPECT_FALSE(t.checkpoints.empty());
    EXPECT_LE(t.steps_trained, 9);
    completed += t.state == TrialState::kCompleted;
    stopped += t.state == TrialState::kEarlyStopped;
  }
  EXPECT_EQ(completed, 1);
  EXPECT_EQ(stopped, 8);
}

TEST_F(TrackerTest, ErroredTrialDoesNotStopExperiment) {
  const auto id = tracker.run_experiment(config({{"a", 0.5}, {"fail", {false, true}}}, {{"name", "grid"}, {"steps", 2}}));
  const auto trials = tracker.trials(id);
  EXPECT_EQ(trials[0].state, TrialState::kCompleted);
  EXPECT_EQ(trials[1].state, TrialState::kErrored);
  EXPECT_FALSE(trials[1].error.empty());
}

TEST_F(TrackerTest, AllErroredHasNoBest) {
  const auto id = tracker.run_experiment(config({{"fail", true}}, {{"name", "single"}}));
  try {
    (void)tracker.best_checkpoint(id, "accuracy", true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCompletedTrials);
  }
}

TEST_F(TrackerTest, MetricStepsMustIncrease) {
  const auto id = tracker.run_experiment(config({{"a", 0.5}}, {{"name", "single"}, {"steps", 1}}));
  const auto before = tracker.metrics(id, "0001").size();
  tracker.log_metrics(id, "0001", 100, {{"loss", 2.0}});
  tracker.log_metrics(id, "0001", 101, {{"loss", 1.5}});
  EXPECT_EQ(tracker.metrics(id, "0001").size(), before + 2);
  try {
    tracker.log_metrics(id, "0001", 50, {{"loss", 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotonicStep);
  }
}

TEST_F(TrackerTest, CheckpointRestoreReproducesMetrics) {
  const auto id = tracker.run_experiment(config({{"a", 0.9}, {"b", 0.4}}, {{"name", "single"}, {"steps", 7}}));
  const auto cp = tracker.best_checkpoint(id, "accuracy", true);
  EXPECT_EQ(tracker.restore_learner(cp)->evaluate(), cp.metrics);
  for (const auto& [name, blob] : cp.artifacts) EXPECT_TRUE(store.objects().contains(blob));
}

TEST_F(TrackerTest, ConfigErrors) {
  EXPECT_THROW(config({{"a", {1, 2}}}, {{"name", "nope"}}), Error);
  try {
    auto c = config({{"a", 0.5}}, {{"name", "single"}});
    c.data.repo = "missing";
    tracker.run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataNotFound);
  }
  EXPECT_THROW(tracker.run_experiment(config({{"a", {0.5, 0.6}}}, {{"name", "single"}})), Error);
}

TEST_F(TrackerTest, ConfigHashIgnoresKeyOrder) {
  const auto a = config({{"a", 0.5}, {"b", 0.1}}, {{"name", "single"}});
  const auto b = ExperimentConfig::from_json(parse_document(
      "name: curve\nseed: 4\nentry_point: synthetic-curve\nsearcher: {name: single}\n"
      "hparams: {b: 0.1, a: 0.5}\ndata: {repo: data}\n"));
  EXPECT_EQ(a.config_hash(), b.config_hash());
}

}  // namespace
}  // namespace dlflow::tracker
