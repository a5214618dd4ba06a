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
#include "common/rng.hpp"
#include "workflow/workflow.hpp"
#include "test_util.hpp"

namespace dlflow::workflow {
namespace {

using governance::Role;
using testing::TempDir;

const governance::Project& project() {
  static const auto p = governance::Project::standard("wf");
  return p;
}

std::string owner_actor(const std::string& step) {
  const auto& s = StepGraph::standard().step(step);
  if (!s.owner) return "dana";
  for (const auto& [actor, role] : project().actors) {
    if (role == *s.owner) return actor;
  }
  return "";
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

class WorkflowTest : public ::testing::Test {
 protected:
  void SetUp() override { engine.start(project(), "dana"); }
  void walk(std::initializer_list<const char*> steps) {
    for (const char* s : steps) engine.advance(project(), s, owner_actor(s));
  }
  void to_review() {
    walk({"define-project-requirements", "initial-setup", "data-collection", "data-ingestion",
          "data-versioning", "data-cleaning", "data-validation", "data-labeling", "data-analysis",
          "data-preprocessing", "model-data-splitting", "model-building", "model-training",
          "experiment-evaluation", "model-registration", "model-evaluation", "model-submission", "review"});
  }

  TempDir dir;
  WorkflowEngine engine{dir.path(), Clock(true, Clock::kDefaultEpoch)};
};

TEST(StepGraphTest, EveryStepHasOneOwnerExceptStart) {
  const auto& g = StepGraph::standard();
  for (const auto& s : g.steps()) {
    if (s.id == kStartStep) {
      EXPECT_FALSE(s.owner.has_value());
    } else {
      EXPECT_TRUE(s.owner.has_value()) << s.id;
    }
  }
  for (const auto& e : g.edges()) {
    EXPECT_TRUE(g.has_step(e.from)) << e.from;
    EXPECT_TRUE(g.has_step(e.to)) << e.to;
  }
  EXPECT_EQ(g.step("data-cleaning").owner, Role::kDataEngineer);
  EXPECT_EQ(g.step("hp-optimization").owner, Role::kDataScientist);
  EXPECT_EQ(g.step("review").owner, Role::kModelValidator);
  EXPECT_EQ(g.step("model-deployment").owner, Role::kDevopsEngineer);
  EXPECT_TRUE(g.step("hp-optimization").optional);
  EXPECT_TRUE(g.step("data-analysis").human_only);
}

TEST(StepGraphTest, EveryStepReachableFromStart) {
  const auto& g = StepGraph::standard();
  std::set<std::string> seen{kStartStep};
  std::vector<std::string> todo{kStartStep};
  while (!todo.empty()) {
    const auto s = todo.back();
    todo.pop_back();
    for (const auto& n : g.successors(s)) {
      if (seen.insert(n).second) todo.push_back(n);
    }
  }
  EXPECT_EQ(seen.size(), g.steps().size());
}

TEST(StepGraphTest, FeedbackEdges) {
  const auto& g = StepGraph::standard();
  for (auto [from, to] : std::vector<std::pair<const char*, const char*>>{
           {"review", "model-building"}, {"review", "data-collection"}, {"data-validation", "data-collection"},
           {"model-maintenance", "data-collection"}, {"model-maintenance", "model-building"},
           {"model-maintenance", "model-deployment"}}) {
    const Edge* e = g.edge(from, to);
    ASSERT_NE(e, nullptr) << from << " -> " << to;
    EXPECT_EQ(e->kind, EdgeKind::kFeedback);
  }
  ASSERT_NE(g.edge("data-ingestion", "model-training"), nullptr);
  EXPECT_EQ(g.edge("model-evaluation", "model-deployment"), nullptr);
}

TEST_F(WorkflowTest, ScientistCannotLabel) {
  walk({"define-project-requirements", "initial-setup", "data-collection", "data-ingestion",
        "data-versioning", "data-cleaning", "data-validation"});
  EXPECT_EQ(code_of([&] { engine.advance(project(), "data-labeling", "sam"); }), ErrorCode::kPermissionDenied);
  EXPECT_EQ(engine.run("wf").current_step, "data-validation");
  engine.advance(project(), "data-labeling", "lee");
  EXPECT_EQ(engine.run("wf").current_step, "data-labeling");
}

TEST_F(WorkflowTest, ReviewFeedbackToModelBuilding) {
  to_review();
  const auto run = engine.advance(project(), "model-building", "sam", "needs more capacity");
  EXPECT_EQ(run.current_step, "model-building");
  EXPECT_EQ(run.history.back().note, "needs more capacity");
  EXPECT_EQ(run.iteration, 1);
}

TEST_F(WorkflowTest, CannotSkipReview) {
  walk({"define-project-requirements", "initial-setup", "data-collection", "data-ingestion", "model-training",
        "experiment-evaluation", "model-registration", "model-evaluation"});
  EXPECT_EQ(code_of([&] { engine.advance(project(), "model-deployment", "ops"); }), ErrorCode::kIllegalTransition);
  EXPECT_EQ(code_of([&] { engine.advance(project(), "no-such-step", "ops"); }), ErrorCode::kNotFound);
}

TEST_F(WorkflowTest, MaintenanceStartsNewIteration) {
  to_review();
  walk({"model-implementation", "implementation-review", "model-packaging", "model-deployment",
        "model-monitoring", "model-maintenance"});
  EXPECT_EQ(engine.run("wf").iteration, 1);
  const auto run = engine.advance(project(), "data-collection", "dana");
  EXPECT_EQ(run.iteration, 2);
  EXPECT_EQ(run.history.back().iteration, 2);
}

TEST_F(WorkflowTest, StartKeepsExistingRunAndPersists) {
  walk({"define-project-requirements"});
  engine.start(project(), "dana");
  WorkflowEngine reopened(dir.path(), Clock(true, Clock::kDefaultEpoch));
  EXPECT_EQ(reopened.run("wf").current_step, "define-project-requirements");
  EXPECT_EQ(reopened.run("wf").history.size(), 2u);
  EXPECT_FALSE(reopened.has_run("other"));
  EXPECT_EQ(code_of([&] { (void)reopened.run("other"); }), ErrorCode::kNotFound);
}

TEST_F(WorkflowTest, RandomWalkRejectsEveryIllegalEdge) {
  const auto& g = StepGraph::standard();
  Rng rng(77);
  std::size_t rejected = 0;
  for (int i = 0; i < 400; ++i) {
    const auto cur = engine.run("wf").current_step;
    const auto& target = g.steps()[rng.uniform_index(g.steps().size())].id;
    const auto actor = owner_actor(target);
    const auto code = code_of([&] { engine.advance(project(), target, actor); });
    if (g.edge(cur, target) == nullptr) {
      ASSERT_EQ(code, ErrorCode::kIllegalTransition) << cur << " -> " << target;
      ++rejected;
    } else {
      ASSERT_EQ(code, ErrorCode::kOk) << cur << " -> " << target;
    }
    if (i % 3 == 0) {
      const auto next = g.successors(engine.run("wf").current_step);
      const auto& pick = next[rng.uniform_index(next.size())];
      engine.advance(project(), pick, owner_actor(pick));
    }
  }
  EXPECT_GT(rejected, 100u);
  const auto run = engine.run("wf");
  for (std::size_t i = 1; i < run.history.size(); ++i) {
    EXPECT_NE(g.edge(run.history[i - 1].step, run.history[i].step), nullptr);
  }
}

}  // namespace
}  // namespace dlflow::workflow
