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

#include <httplib.h>

#include "app/commands.hpp"
#include "app/context.hpp"
#include "app/http_server.hpp"
#include "common/error.hpp"
#include "learners/synth.hpp"
#include "test_util.hpp"

namespace dlflow::app {
namespace {

using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(Base64, RoundTripsAllLengths) {
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  EXPECT_EQ(base64_encode(""), "");
  std::string bytes;
  for (int i = 0; i < 40; ++i) {
    bytes.push_back(static_cast<char>(i * 37));
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  EXPECT_THROW(base64_decode("@@@"), Error);
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(ErrorCode::kNotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::kPermissionDenied), 403);
  EXPECT_EQ(http_status(ErrorCode::kEndpointConflict), 409);
  EXPECT_EQ(http_status(ErrorCode::kInternal), 500);
  EXPECT_EQ(http_status(ErrorCode::kMalformedPayload), 400);
}

class DispatchTest : public ::testing::Test {
 protected:
  TempDir dir;
  Context ctx{testing::deterministic_options(dir.path())};
};

TEST_F(DispatchTest, StoreVerbs) {
  dispatch(ctx, "repo.create", {{"name", "raw"}});
  const auto c = dispatch(ctx, "commit", {{"repo", "raw"}, {"files", {{"a.txt", "alpha"}}},
                                          {"files_base64", {{"b.bin", base64_encode(std::string("\xff\x00", 2))}}},
                                          {"message", "first"}});
  EXPECT_TRUE(is_hash_id(c.at("id").get<std::string>()));
  EXPECT_EQ(dispatch(ctx, "read", {{"repo", "raw"}, {"path", "a.txt"}}).at("content"), "alpha");
  EXPECT_EQ(base64_decode(dispatch(ctx, "read", {{"repo", "raw"}, {"path", "b.bin"}}).at("content_base64").get<std::string>()),
            std::string("\xff\x00", 2));
  EXPECT_EQ(dispatch(ctx, "ls", {{"repo", "raw"}}).size(), 2u);
  EXPECT_EQ(dispatch(ctx, "log", {{"repo", "raw"}}).size(), 1u);
}

TEST_F(DispatchTest, ErrorsCarryCodes) {
  EXPECT_EQ(code_of([&] { dispatch(ctx, "no.such", json::object()); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { dispatch(ctx, "repo.create", json::object()); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { dispatch(ctx, "repo.create", json::array()); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { dispatch(ctx, "repo.show", {{"name", "ghost"}}); }), ErrorCode::kNotFound);
  const auto names = command_names();
  EXPECT_FALSE(names.empty());
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
}

TEST_F(DispatchTest, RolesApplyAfterInit) {
  dispatch(ctx, "init", {{"name", "demo"}, {"as", "dana"}});
  EXPECT_EQ(code_of([&] { dispatch(ctx, "repo.create", {{"name", "raw"}, {"as", "sam"}}); }), ErrorCode::kPermissionDenied);
  dispatch(ctx, "repo.create", {{"name", "raw"}, {"as", "dana"}});
  dispatch(ctx, "step", {{"step", "define-project-requirements"}, {"as", "val"}, {"note", "accuracy over 0.7"}});
  EXPECT_EQ(code_of([&] { dispatch(ctx, "step", {{"step", "model-deployment"}, {"as", "ops"}}); }),
            ErrorCode::kIllegalTransition);
  EXPECT_EQ(dispatch(ctx, "workflow.show", json::object()).at("current_step"), "define-project-requirements");
}

TEST_F(DispatchTest, YamlDocumentsAsText) {
  dispatch(ctx, "repo.create", {{"name", "raw"}});
  const auto spec = "name: clean\ninputs: [{repo: raw}]\ntransform: clean_validate_text\n"
                    "params: {min_chars: 3}\ntrigger: on-commit\n";
  dispatch(ctx, "pipeline.register", {{"spec_text", spec}});
  const auto c = dispatch(ctx, "commit", {{"repo", "raw"}, {"files", {{"a.txt", "long enough"}, {"b.txt", "no"}}}});
  ASSERT_EQ(c.at("jobs").size(), 1u);
  EXPECT_EQ(dispatch(ctx, "ls", {{"repo", "clean"}}).size(), 1u);
}

TEST(UseCase, FashionIsReproducibleAndTracesToManualCommit) {
  TempDir a, b;
  json ra, rb;
  {
    Context ctx(testing::deterministic_options(a.path()));
    ra = ctx.run_use_case("fashion");
    const auto t = ctx.trace("fashion-classifier", 1);
    EXPECT_TRUE(t.at("digest_match").get<bool>());
    EXPECT_TRUE(t.at("chain").back().at("pipeline").is_null());
    EXPECT_EQ(t.at("raw_commits"), json::array({ra.at("commits").at("data")}));
    EXPECT_EQ(code_of([&] { ctx.run_use_case("fashion"); }), ErrorCode::kDuplicateName);
    EXPECT_EQ(code_of([&] { ctx.trace("fashion-classifier", 9); }), ErrorCode::kNotFound);
  }
  {
    Context ctx(testing::deterministic_options(b.path()));
    rb = ctx.run_use_case("fashion");
  }
  EXPECT_EQ(ra, rb);
  EXPECT_GE(ra.at("test_accuracy").get<double>(), 0.7);
  EXPECT_TRUE(ra.at("smoke").at("valid_classes").get<bool>());
  EXPECT_TRUE(ra.at("normalization").at("exact").get<bool>());
}

TEST(UseCase, NewsTraceReachesRawIngestion) {
  TempDir dir;
  Context ctx(testing::deterministic_options(dir.path()));
  const auto r = ctx.run_use_case("news");
  EXPECT_GE(r.at("test_accuracy").get<double>(), 0.7);
  const auto t = ctx.trace(r.at("model").get<std::string>(), r.at("model_version").get<int>());
  EXPECT_GE(t.at("depth").get<int>(), 4);
  EXPECT_EQ(t.at("raw_commits"), json::array({r.at("commits").at("raw")}));
  EXPECT_EQ(ctx.store().log("news-raw", "master").back().id, r.at("commits").at("raw").get<std::string>());
  EXPECT_TRUE(t.at("digest_match").get<bool>());
  EXPECT_EQ(code_of([&] { ctx.run_use_case("other"); }), ErrorCode::kInvalidArgument);
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    port = server.bind("127.0.0.1", 0);
    server.start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override { server.stop(); }

  json post(const std::string& path, const json& body, const httplib::Headers& headers = {}) {
    auto res = client->Post(path, headers, body.dump(), "application/json");
    if (!res) throw std::runtime_error("no response");
    last_status = res->status;
    return json::parse(res->body);
  }
  json get(const std::string& path) {
    auto res = client->Get(path);
    if (!res) throw std::runtime_error("no response");
    last_status = res->status;
    return json::parse(res->body);
  }

  TempDir dir;
  Context ctx{testing::deterministic_options(dir.path())};
  HttpServer server{ctx};
  int port = 0;
  int last_status = 0;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(HttpTest, HealthAndApi) {
  EXPECT_EQ(get("/health").at("status"), "ok");
  post("/api/v1/repo/create", {{"name", "raw"}});
  EXPECT_EQ(last_status, 200);
  post("/api/v1/repo/create", {{"name", "raw"}});
  EXPECT_EQ(last_status, 409);
  const auto err = get("/api/v1/repo/show?name=ghost");
  EXPECT_EQ(last_status, 404);
  EXPECT_EQ(err.at("error").at("code"), "not-found");
  post("/api/v1/init", {{"name", "web"}}, {{"X-Actor", "dana"}});
  post("/api/v1/step", {{"step", "define-project-requirements"}}, {{"X-Actor", "sam"}});
  EXPECT_EQ(last_status, 403);
}

TEST_F(HttpTest, PredictAndScoring) {
  ctx.run_use_case("fashion");
  const auto img = learners::synth_images(10, 1, 5).at(3);
  const json data(std::vector<int>(img.pixels.begin(), img.pixels.end()));
  const auto p = post("/predict/fashion-classifier", {{"data", data}});
  EXPECT_EQ(last_status, 200);
  EXPECT_EQ(p.at("model_version"), 1);
  EXPECT_EQ(p.at("scores").size(), 10u);
  EXPECT_EQ(p.at("scores"), json(ctx.gateway().predict("fashion-classifier", json{{"data", data}}).to_json().at("scores")));

  auto res = client->Post("/predict/fashion-classifier", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("error").at("code"), "malformed-payload");
  post("/predict/unknown", {{"data", 1}});
  EXPECT_EQ(last_status, 404);

  const auto log = get("/scoring/fashion-classifier");
  EXPECT_EQ(log.back().at("status"), "error");
  EXPECT_EQ(get("/deployments").size(), 1u);
  EXPECT_EQ(get("/models/fashion-classifier").at("versions").size(), 1u);
}

}  // namespace
}  // namespace dlflow::app
