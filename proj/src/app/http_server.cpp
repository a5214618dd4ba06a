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

#include "app/http_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <mutex>
#include <thread>

#include "app/commands.hpp"

namespace dlflow::app {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return 200;
    case ErrorCode::kNotFound:
    case ErrorCode::kDataNotFound:
    case ErrorCode::kMissingCheckpoint:
    case ErrorCode::kMissingArtifact:
    case ErrorCode::kNoProductionVersion:
    case ErrorCode::kMissingInputRepo:
    case ErrorCode::kDanglingPath:
      return 404;
    case ErrorCode::kPermissionDenied:
    case ErrorCode::kSelfReviewDenied:
      return 403;
    case ErrorCode::kDuplicateName:
    case ErrorCode::kWrongStage:
    case ErrorCode::kGateFailed:
    case ErrorCode::kMissingTestMetrics:
    case ErrorCode::kEndpointConflict:
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kNonMonotonicStep:
    case ErrorCode::kNoCompletedTrials:
      return 409;
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
    case ErrorCode::kTransformFailure:
    case ErrorCode::kLearnerError:
    case ErrorCode::kNonFiniteLoss:
      return 500;
    default:
      return 400;
  }
}

struct HttpServer::Impl {
  Context& ctx;
  httplib::Server server;
  std::mutex mu;  // serializes everything except predictions
  std::thread thread;

  explicit Impl(Context& c) : ctx(c) {}

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, const Error& e) {
    reply(res, http_status(e.code()), {{"error", {{"code", to_string(e.code()), }, {"message", e.what()}}}});
  }

  template <class F>
  void guarded(httplib::Response& res, F&& fn, bool exclusive = true) {
    try {
      json out;
      if (exclusive) {
        std::lock_guard lock(mu);
        out = fn();
      } else {
        out = fn();
      }
      reply(res, 200, out);
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const json::exception& e) {
      reply_error(res, Error(ErrorCode::kInvalidArgument, e.what()));
    } catch (const std::exception& e) {
      reply_error(res, Error(ErrorCode::kInternal, e.what()));
    }
  }

  static json body_args(const httplib::Request& req) {
    json args = json::object();
    if (!req.body.empty()) {
      try {
        args = json::parse(req.body);
      } catch (const json::exception& e) {
        fail(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
      }
      if (!args.is_object()) fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    }
    for (const auto& [k, v] : req.params) {
      if (!args.contains(k)) args[k] = v;
    }
    if (!args.contains("as") && req.has_header("X-Actor")) args["as"] = req.get_header_value("X-Actor");
    return args;
  }

  void predict(const std::string& deployment, const httplib::Request& req, httplib::Response& res) {
    guarded(
        res, [&] { return ctx.gateway().predict(deployment, std::string_view(req.body)).to_json(); }, false);
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); });

    auto api = [this](const httplib::Request& req, httplib::Response& res) {
      std::string op = req.matches[1];
      std::replace(op.begin(), op.end(), '/', '.');
      guarded(res, [&] { return dispatch(ctx, op, body_args(req)); });
    };
    server.Get(R"(/api/v1/(.+))", api);
    server.Post(R"(/api/v1/(.+))", api);

    server.Get("/deployments", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { return dispatch(ctx, "deploy.list", json::object()); });
    });
    server.Get(R"(/scoring/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        json args = {{"deployment", req.matches[1].str()}};
        if (req.has_param("since")) args["since"] = std::stoll(req.get_param_value("since"));
        return dispatch(ctx, "scoring", args);
      });
    });
    server.Get(R"(/models/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { return dispatch(ctx, "model.show", {{"name", req.matches[1].str()}}); });
    });
    server.Post(R"(/models/([^/]+)/versions)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        json args = body_args(req);
        args["name"] = req.matches[1].str();
        return dispatch(ctx, "model.register", args);
      });
    });
    server.Post(R"(/models/([^/]+)/versions/(\d+)/(submit|review|promote))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    json args = body_args(req);
                    args["name"] = req.matches[1].str();
                    args["version"] = std::stoi(req.matches[2].str());
                    return dispatch(ctx, "model." + req.matches[3].str(), args);
                  });
                });
    // Anything else is a deployment endpoint, /predict/<name> by default.
    server.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> dep;
      {
        std::lock_guard lock(mu);
        dep = ctx.gateway().deployment_for_endpoint(req.path);
      }
      if (!dep) {
        reply_error(res, Error(ErrorCode::kNotFound, "no deployment serves " + req.path));
        return;
      }
      predict(*dep, req, res);
    });
  }
};

HttpServer::HttpServer(Context& ctx) : impl_(std::make_unique<Impl>(ctx)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace dlflow::app
