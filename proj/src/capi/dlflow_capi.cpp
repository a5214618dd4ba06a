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

#include "dlflow/dlflow.h"

#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "app/commands.hpp"
#include "app/context.hpp"
#include "app/http_server.hpp"
#include "common/error.hpp"

using dlflow::ErrorCode;
using dlflow::json;

static_assert(static_cast<int>(ErrorCode::kInternal) == DLFLOW_E_INTERNAL);
static_assert(static_cast<int>(ErrorCode::kMalformedPayload) == DLFLOW_E_MALFORMED_PAYLOAD);
static_assert(static_cast<int>(ErrorCode::kGateFailed) == DLFLOW_E_GATE_FAILED);

struct dlflow_context {
  std::unique_ptr<dlflow::app::Context> ctx;
};

struct dlflow_server {
  std::unique_ptr<dlflow::app::HttpServer> http;
  std::mutex mu;
  std::condition_variable cv;
  bool stopped = false;
};

namespace {

thread_local std::string last_error;

char* dup_bytes(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

template <class F>
int guard(F&& fn) {
  try {
    fn();
    last_error.clear();
    return DLFLOW_OK;
  } catch (const dlflow::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return DLFLOW_E_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DLFLOW_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DLFLOW_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) dlflow::fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* dlflow_version(void) { return "0.1.0"; }

const char* dlflow_status_name(int status) {
  if (status < 0 || status > DLFLOW_E_INTERNAL) return "unknown";
  return dlflow::to_string(static_cast<ErrorCode>(status));
}

const char* dlflow_last_error(void) { return last_error.c_str(); }

int dlflow_open(const char* root, int deterministic, dlflow_context** out) {
  return guard([&] {
    require(out != nullptr, "out");
    auto options = dlflow::app::ContextOptions::from_env();
    if (root != nullptr) options.root = root;
    if (deterministic >= 0) options.deterministic = deterministic != 0;
    auto handle = std::make_unique<dlflow_context>();
    handle->ctx = std::make_unique<dlflow::app::Context>(options);
    *out = handle.release();
  });
}

void dlflow_close(dlflow_context* ctx) { delete ctx; }

int dlflow_call(dlflow_context* ctx, const char* op, const char* args_json, char** out_json) {
  return guard([&] {
    require(ctx != nullptr, "ctx");
    require(op != nullptr, "op");
    require(out_json != nullptr, "out_json");
    json args = json::object();
    if (args_json != nullptr && *args_json != '\0') {
      try {
        args = json::parse(args_json);
      } catch (const json::exception& e) {
        dlflow::fail(ErrorCode::kInvalidArgument, std::string("arguments are not JSON: ") + e.what());
      }
    }
    *out_json = dup_bytes(dlflow::app::dispatch(*ctx->ctx, op, args).dump());
  });
}

int dlflow_commands(char** out) {
  return guard([&] {
    require(out != nullptr, "out");
    std::string s;
    for (const auto& n : dlflow::app::command_names()) s += n + "\n";
    *out = dup_bytes(s);
  });
}

int dlflow_commit(dlflow_context* ctx, const char* repo, const char* branch, const char* author,
                  const char* message, size_t count, const char* const* paths, const char* const* data,
                  const size_t* sizes, char** out_json) {
  return guard([&] {
    require(ctx != nullptr, "ctx");
    require(repo != nullptr, "repo");
    require(out_json != nullptr, "out_json");
    require(count == 0 || (paths != nullptr && data != nullptr && sizes != nullptr), "file arrays");
    const std::string who = author != nullptr ? author : "anonymous";
    if (ctx->ctx->has_project()) {
      ctx->ctx->project().require(who, {dlflow::governance::Role::kDataEngineer}, "commit data");
    }
    std::map<std::string, std::string> files;
    for (size_t i = 0; i < count; ++i) {
      require(paths[i] != nullptr && (data[i] != nullptr || sizes[i] == 0), "file entry");
      files[paths[i]] = std::string(data[i] == nullptr ? "" : data[i], sizes[i]);
    }
    const auto out = ctx->ctx->commit(repo, branch != nullptr ? branch : "master", files, who,
                                      message != nullptr ? message : "");
    *out_json = dup_bytes(out.dump());
  });
}

int dlflow_read_file(dlflow_context* ctx, const char* repo, const char* ref, const char* path, char** out,
                     size_t* size) {
  return guard([&] {
    require(ctx != nullptr && repo != nullptr && path != nullptr, "ctx, repo and path");
    require(out != nullptr && size != nullptr, "out and size");
    const auto bytes = ctx->ctx->store().read_file(repo, ref != nullptr ? ref : "master", path);
    *out = dup_bytes(bytes);
    *size = bytes.size();
  });
}

int dlflow_predict(dlflow_context* ctx, const char* deployment, const char* body, size_t size, char** out_json) {
  return guard([&] {
    require(ctx != nullptr && deployment != nullptr, "ctx and deployment");
    require(out_json != nullptr, "out_json");
    const std::string_view raw(body == nullptr ? "" : body, body == nullptr ? 0 : size);
    *out_json = dup_bytes(ctx->ctx->gateway().predict(deployment, raw).to_json().dump());
  });
}

int dlflow_server_start(dlflow_context* ctx, const char* host, int port, dlflow_server** out, int* bound_port) {
  return guard([&] {
    require(ctx != nullptr && out != nullptr, "ctx and out");
    if (port < 0 || port > 65535) dlflow::fail(ErrorCode::kInvalidArgument, "port out of range");
    auto server = std::make_unique<dlflow_server>();
    server->http = std::make_unique<dlflow::app::HttpServer>(*ctx->ctx);
    const int bound = server->http->bind(host != nullptr ? host : "127.0.0.1", port);
    server->http->start();
    if (bound_port != nullptr) *bound_port = bound;
    *out = server.release();
  });
}

int dlflow_server_wait(dlflow_server* server) {
  return guard([&] {
    require(server != nullptr, "server");
    std::unique_lock lock(server->mu);
    server->cv.wait(lock, [&] { return server->stopped; });
  });
}

void dlflow_server_stop(dlflow_server* server) {
  if (server == nullptr) return;
  server->http->stop();
  {
    std::lock_guard lock(server->mu);
    server->stopped = true;
  }
  server->cv.notify_all();
}

void dlflow_server_free(dlflow_server* server) {
  if (server == nullptr) return;
  server->http->stop();
  delete server;
}

void dlflow_free(void* p) { std::free(p); }

}  // extern "C"
