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
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "dlflow/dlflow.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Scratch {
 public:
  Scratch() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("dlflow-capi-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

class Handle {
 public:
  explicit Handle(const fs::path& root) {
    EXPECT_EQ(dlflow_open(root.c_str(), 1, &ctx_), DLFLOW_OK) << dlflow_last_error();
  }
  ~Handle() { dlflow_close(ctx_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  dlflow_context* get() { return ctx_; }

  int call(const std::string& op, const json& args, json* result = nullptr) {
    char* out = nullptr;
    const int rc = dlflow_call(ctx_, op.c_str(), args.dump().c_str(), &out);
    if (rc == DLFLOW_OK) {
      if (result) *result = json::parse(out);
      dlflow_free(out);
    }
    return rc;
  }

 private:
  dlflow_context* ctx_ = nullptr;
};

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(dlflow_status_name(DLFLOW_OK), "ok");
  EXPECT_STREQ(dlflow_status_name(DLFLOW_E_NOT_FOUND), "not-found");
  EXPECT_STREQ(dlflow_status_name(DLFLOW_E_PERMISSION_DENIED), "permission-denied");
  EXPECT_STREQ(dlflow_status_name(999), "unknown");
  EXPECT_GT(std::strlen(dlflow_version()), 0u);
}

TEST(CApi, NullArgumentsAreRejected) {
  dlflow_context* ctx = nullptr;
  EXPECT_EQ(dlflow_open(nullptr, 1, nullptr), DLFLOW_E_INVALID_ARGUMENT);
  EXPECT_EQ(dlflow_call(nullptr, "repo.list", nullptr, nullptr), DLFLOW_E_INVALID_ARGUMENT);
  EXPECT_EQ(ctx, nullptr);
  dlflow_close(nullptr);
  dlflow_free(nullptr);
}

TEST(CApi, CallCommitAndRead) {
  Scratch dir;
  Handle h(dir.path());
  EXPECT_EQ(h.call("repo.create", {{"name", "raw"}}), DLFLOW_OK);
  EXPECT_EQ(h.call("repo.create", {{"name", "raw"}}), DLFLOW_E_DUPLICATE_NAME);
  EXPECT_NE(std::string(dlflow_last_error()).find("raw"), std::string::npos);
  EXPECT_EQ(h.call("no.such.op", json::object()), DLFLOW_E_INVALID_ARGUMENT);

  char* out = nullptr;
  EXPECT_EQ(dlflow_call(h.get(), "repo.create", "{not json", &out), DLFLOW_E_INVALID_ARGUMENT);

  const char* paths[] = {"docs/a.txt", "bin/z.dat"};
  const char bytes[] = {'\0', '\xff', 'x'};
  const char* data[] = {"hello", bytes};
  const size_t sizes[] = {5, 3};
  ASSERT_EQ(dlflow_commit(h.get(), "raw", "master", "dana", "first", 2, paths, data, sizes, &out), DLFLOW_OK)
      << dlflow_last_error();
  const auto commit = json::parse(out);
  dlflow_free(out);
  EXPECT_EQ(commit.at("id").get<std::string>().size(), 64u);
  EXPECT_STREQ(dlflow_last_error(), "");

  size_t size = 0;
  ASSERT_EQ(dlflow_read_file(h.get(), "raw", "master", "bin/z.dat", &out, &size), DLFLOW_OK);
  EXPECT_EQ(std::string(out, size), std::string(bytes, 3));
  EXPECT_EQ(out[size], '\0');
  dlflow_free(out);
  EXPECT_EQ(dlflow_read_file(h.get(), "raw", "master", "nope", &out, &size), DLFLOW_E_NOT_FOUND);
  const char* bad[] = {"../escape"};
  EXPECT_EQ(dlflow_commit(h.get(), "raw", "master", "dana", "m", 1, bad, data, sizes, &out), DLFLOW_E_PATH_ESCAPE);

  ASSERT_EQ(dlflow_commands(&out), DLFLOW_OK);
  EXPECT_NE(std::string(out).find("repo.create\n"), std::string::npos);
  dlflow_free(out);
}

TEST(CApi, SameCommitIdsAcrossRoots) {
  Scratch a, b;
  std::string ids[2];
  int i = 0;
  for (const auto* dir : {&a, &b}) {
    Handle h(dir->path());
    h.call("repo.create", {{"name", "raw"}});
    json res;
    ASSERT_EQ(h.call("commit", {{"repo", "raw"}, {"files", {{"x.txt", "same"}}}, {"message", "m"}}, &res), DLFLOW_OK);
    ids[i++] = res.at("id");
  }
  EXPECT_EQ(ids[0], ids[1]);
}

TEST(CApi, PredictAndServe) {
  Scratch dir;
  Handle h(dir.path());
  json report;
  ASSERT_EQ(h.call("usecase", {{"which", "fashion"}}, &report), DLFLOW_OK) << dlflow_last_error();
  const std::string dep = report.at("deployment");

  json body = {{"data", json::array()}};
  for (int i = 0; i < 784; ++i) body["data"].push_back(i % 256);
  const auto text = body.dump();
  char* out = nullptr;
  ASSERT_EQ(dlflow_predict(h.get(), dep.c_str(), text.data(), text.size(), &out), DLFLOW_OK) << dlflow_last_error();
  const auto local = json::parse(out);
  dlflow_free(out);
  EXPECT_EQ(local.at("scores").size(), 10u);
  EXPECT_EQ(dlflow_predict(h.get(), dep.c_str(), "{x", 2, &out), DLFLOW_E_MALFORMED_PAYLOAD);

  dlflow_server* server = nullptr;
  int port = 0;
  ASSERT_EQ(dlflow_server_start(h.get(), "127.0.0.1", 0, &server, &port), DLFLOW_OK) << dlflow_last_error();
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto res = client.Post(report.at("endpoint").get<std::string>(), text, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body).at("scores"), local.at("scores"));
  dlflow_server_stop(server);
  EXPECT_EQ(dlflow_server_wait(server), DLFLOW_OK);
  dlflow_server_free(server);
}

std::string run_cli(const std::string& args, int* status) {
  const std::string cmd = std::string(DLFLOW_CLI_PATH) + " " + args + " 2>&1";
  std::string output;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    *status = -1;
    return output;
  }
  char buf[4096];
  size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int raw = pclose(pipe);
  *status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return output;
}

TEST(Cli, CommitReadAndErrors) {
  Scratch dir;
  const auto root = " --root " + dir.path().string() + " --deterministic ";
  const auto src = dir.path() / "src";
  fs::create_directories(src / "sub");
  std::ofstream(src / "sub" / "a.txt") << "alpha";
  int status = 0;
  run_cli("repo create raw" + root, &status);
  EXPECT_EQ(status, 0);
  const auto commit = run_cli("commit raw@master " + src.string() + " -m first --compact" + root, &status);
  ASSERT_EQ(status, 0) << commit;
  EXPECT_EQ(json::parse(commit).at("id").get<std::string>().size(), 64u);
  EXPECT_EQ(run_cli("read raw@master:sub/a.txt" + root, &status), "alpha");
  EXPECT_EQ(status, 0);

  const auto missing = run_cli("read raw@master:nope" + root, &status);
  EXPECT_EQ(status, DLFLOW_E_NOT_FOUND);
  EXPECT_NE(missing.find("not-found"), std::string::npos);
  run_cli("repo create raw" + root, &status);
  EXPECT_EQ(status, DLFLOW_E_DUPLICATE_NAME);
  const auto listed = run_cli("commands" + root, &status);
  EXPECT_NE(listed.find("usecase"), std::string::npos);
  run_cli("frobnicate" + root, &status);
  EXPECT_NE(status, 0);
}

}  // namespace
