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

#include "serving/gateway.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "common/uuid.hpp"
#include "learners/mlp_learners.hpp"

namespace dlflow::serving {
namespace {

const std::set<std::string>& known_steps() {
  static const std::set<std::string> steps = {"tokenize", "count-vectorize", "flatten", "scale"};
  return steps;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    if (nl > pos) out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

void validate_wrapper(const json& w) {
  if (!w.is_object() || !w.contains("init") || !w.contains("preprocess") || !w.contains("postprocess")) {
    fail(ErrorCode::kInvalidConfig, "wrapper needs init, preprocess and postprocess");
  }
  if (!w.at("init").is_array()) fail(ErrorCode::kInvalidConfig, "wrapper init must list artifact names");
  for (const auto& step : w.at("preprocess")) {
    const auto id = step.is_string() ? step.get<std::string>() : step.value("id", std::string());
    if (!known_steps().contains(id)) fail(ErrorCode::kInvalidConfig, "unknown preprocess step '" + id + "'");
  }
  const auto& post = w.at("postprocess");
  const auto post_id = post.is_string() ? post.get<std::string>() : post.value("id", std::string());
  if (post_id != "label-decode") fail(ErrorCode::kInvalidConfig, "unknown postprocess step '" + post_id + "'");
}

}  // namespace

// ------------------------------------------------------------------ records

json PackagedModel::content() const {
  return {{"model_name", model_name}, {"version", version},   {"learner", learner},
          {"checkpoint", checkpoint}, {"wrapper", wrapper},   {"artifacts", artifacts}};
}

json PackagedModel::to_json() const {
  json j = content();
  j["package_hash"] = package_hash;
  return j;
}

PackagedModel PackagedModel::from_json(const json& j) {
  PackagedModel p;
  p.model_name = j.at("model_name").get<std::string>();
  p.version = j.at("version").get<int>();
  p.learner = j.at("learner").get<std::string>();
  p.checkpoint = j.at("checkpoint").get<std::string>();
  p.wrapper = j.at("wrapper");
  p.artifacts = j.at("artifacts").get<std::map<std::string, HashId>>();
  p.package_hash = j.at("package_hash").get<std::string>();
  return p;
}

json DeploymentManifest::to_json() const {
  json j = {{"deployment_name", deployment_name},
            {"model_name", model_name},
            {"selector", version ? json{{"version", *version}} : json{{"stage", "production"}}},
            {"endpoint", endpoint},
            {"replicas", replicas},
            {"resources", resources.to_json()},
            {"staging", staging}};
  return j;
}

DeploymentManifest DeploymentManifest::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "manifest must be a map");
  DeploymentManifest m;
  m.deployment_name = j.value("deployment_name", j.value("name", std::string()));
  m.model_name = j.value("model_name", j.value("model", std::string()));
  if (m.deployment_name.empty() || m.model_name.empty()) {
    fail(ErrorCode::kInvalidConfig, "manifest needs deployment_name and model_name");
  }
  if (j.contains("selector")) {
    const auto& s = j.at("selector");
    if (s.is_object() && s.contains("version")) {
      m.version = s.at("version").get<int>();
    } else if (s.is_number_integer()) {
      m.version = s.get<int>();
    } else if (!(s.is_object() && s.value("stage", "") == "production") && !(s.is_string() && s == "production")) {
      fail(ErrorCode::kInvalidConfig, "selector must be a version or stage=production");
    }
  } else if (j.contains("version")) {
    m.version = j.at("version").get<int>();
  }
  m.endpoint = j.value("endpoint", std::string());
  m.replicas = j.value("replicas", 1);
  if (j.contains("resources")) m.resources = pipeline::ResourceHints::from_json(j.at("resources"));
  m.staging = j.value("staging", false);
  return m;
}

json Deployment::to_json() const {
  return {{"manifest", manifest.to_json()},
          {"deployment_name", manifest.deployment_name},
          {"endpoint", manifest.endpoint},
          {"model_name", manifest.model_name},
          {"model_version", model_version},
          {"package_hash", package_hash},
          {"deployed_at", deployed_at}};
}

Deployment Deployment::from_json(const json& j) {
  Deployment d;
  d.manifest = DeploymentManifest::from_json(j.at("manifest"));
  d.model_version = j.at("model_version").get<int>();
  d.package_hash = j.at("package_hash").get<std::string>();
  d.deployed_at = j.at("deployed_at").get<int64_t>();
  return d;
}

json Prediction::to_json() const {
  json s = json::object();
  for (std::size_t i = 0; i < scores.size() && i < classes.size(); ++i) s[classes[i]] = scores[i];
  return {{"label", label}, {"scores", s}, {"model_version", model_version}, {"request_id", request_id}};
}

// ---------------------------------------------------------------- predictor

Predictor::Predictor(PackagedModel package, const std::map<std::string, std::string>& artifacts)
    : package_(std::move(package)), net_(learners::Mlp::deserialize(artifacts.at("weights"))) {
  for (const auto& step : package_.wrapper.at("preprocess")) {
    if (step.is_object() && step.value("id", "") == "count-vectorize") {
      const auto name = step.value("params", json::object()).value("vocabulary", std::string("vocabulary"));
      auto it = artifacts.find(name);
      if (it == artifacts.end()) fail(ErrorCode::kMissingArtifact, "missing artifact " + name);
      vocab_ = learners::Vocabulary::deserialize(it->second);
    }
  }
  const auto& post = package_.wrapper.at("postprocess");
  const auto labels = post.is_object() ? post.value("params", json::object()).value("labels", std::string("labels"))
                                       : std::string("labels");
  auto it = artifacts.find(labels);
  if (it == artifacts.end()) fail(ErrorCode::kMissingArtifact, "missing artifact " + labels);
  classes_ = lines_of(it->second);
  if (classes_.size() != net_.output_dim()) fail(ErrorCode::kShapeMismatch, "label count does not match model");
}

std::vector<double> Predictor::preprocess(const json& data) const {
  std::optional<std::vector<std::string>> tokens;
  std::optional<std::vector<double>> vec;
  for (const auto& step : package_.wrapper.at("preprocess")) {
    const auto id = step.is_string() ? step.get<std::string>() : step.value("id", std::string());
    const json params = step.is_object() ? step.value("params", json::object()) : json::object();
    if (id == "tokenize") {
      if (!data.is_string()) fail(ErrorCode::kMalformedPayload, "payload data must be text");
      tokens = learners::tokenize(data.get<std::string>());
    } else if (id == "count-vectorize") {
      if (!tokens || !vocab_) fail(ErrorCode::kMalformedPayload, "count-vectorize needs tokens");
      vec = learners::vectorize(*tokens, *vocab_);
    } else if (id == "flatten") {
      vec = learners::flatten_image_payload(data);
    } else if (id == "scale") {
      if (!vec) fail(ErrorCode::kMalformedPayload, "scale needs a numeric vector");
      const double divisor = params.value("divisor", 1.0);
      for (double& v : *vec) v /= divisor;
    }
  }
  if (!vec || vec->size() != net_.input_dim()) {
    fail(ErrorCode::kMalformedPayload, "payload does not produce " + std::to_string(net_.input_dim()) + " features");
  }
  return *vec;
}

std::pair<std::size_t, std::vector<double>> Predictor::predict(const json& data) const {
  auto scores = net_.predict_proba(preprocess(data));
  const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  return {best, std::move(scores)};
}

// ------------------------------------------------------------------ gateway

Gateway::Gateway(store::DataStore& store, registry::ModelRegistry& registry,
                 const tracker::ExperimentTracker& tracker)
    : store_(store), registry_(registry), tracker_(tracker) {}

PackagedModel Gateway::package_model(const std::string& name, int version,
                                     const std::optional<json>& wrapper) {
  const auto v = registry_.version(name, version);
  if (v.stage != registry::Stage::kApproved && v.stage != registry::Stage::kProduction) {
    fail(ErrorCode::kWrongStage, "only approved or production versions can be packaged; stage is " +
                                     std::string(registry::to_string(v.stage)));
  }
  const auto cp = tracker_.checkpoint(v.checkpoint);
  PackagedModel p;
  p.model_name = name;
  p.version = version;
  p.learner = tracker_.experiment(cp.experiment).at("entry_point").get<std::string>();
  p.checkpoint = cp.id;
  p.wrapper = wrapper ? *wrapper : tracker_.learners().create(p.learner)->serving_wrapper();
  validate_wrapper(p.wrapper);
  for (const auto& a : p.wrapper.at("init")) {
    const auto an = a.get<std::string>();
    auto it = cp.artifacts.find(an);
    if (it == cp.artifacts.end() || !store_.objects().contains(it->second)) {
      fail(ErrorCode::kMissingArtifact, "checkpoint " + cp.id + " has no artifact " + an);
    }
    p.artifacts[an] = it->second;
  }
  if (!p.artifacts.contains("weights")) fail(ErrorCode::kMissingArtifact, "wrapper must load weights");
  p.package_hash = sha256_hex(canonical(p.content()));
  write_json_atomic(dir() / "packages" / (p.package_hash + ".json"), p.to_json());
  write_json_atomic(dir() / "packaged" / name / (std::to_string(version) + ".json"),
                    json{{"package_hash", p.package_hash}});
  return p;
}

PackagedModel Gateway::package(const HashId& hash) const {
  const auto p = dir() / "packages" / (hash + ".json");
  if (!is_hash_id(hash) || !fs::exists(p)) fail(ErrorCode::kNotFound, "no package " + hash);
  return PackagedModel::from_json(read_json(p));
}

std::shared_ptr<const Predictor> Gateway::load_predictor(const PackagedModel& package) const {
  std::map<std::string, std::string> bytes;
  for (const auto& [name, blob] : package.artifacts) {
    if (!store_.objects().contains(blob)) fail(ErrorCode::kMissingArtifact, "artifact " + name + " is missing");
    bytes[name] = store_.objects().get(blob);
  }
  return std::make_shared<const Predictor>(package, bytes);
}

Deployment Gateway::deploy(const DeploymentManifest& manifest_in) {
  DeploymentManifest manifest = manifest_in;
  if (!store::is_valid_repo_name(manifest.deployment_name)) {
    fail(ErrorCode::kInvalidName, "invalid deployment name '" + manifest.deployment_name + "'");
  }
  if (manifest.endpoint.empty()) manifest.endpoint = "/predict/" + manifest.deployment_name;
  if (manifest.endpoint.front() != '/') fail(ErrorCode::kInvalidArgument, "endpoint must be a URL path");

  int version = 0;
  if (manifest.version) {
    const auto v = registry_.version(manifest.model_name, *manifest.version);
    const bool ok = v.stage == registry::Stage::kProduction ||
                    (manifest.staging && v.stage == registry::Stage::kApproved);
    if (!ok) {
      fail(ErrorCode::kWrongStage, "version " + std::to_string(v.version) + " is " + registry::to_string(v.stage) +
                                       (manifest.staging ? "" : "; approved versions need staging"));
    }
    version = v.version;
  } else {
    const auto prod = registry_.production(manifest.model_name);
    if (!prod) fail(ErrorCode::kNoProductionVersion, "model " + manifest.model_name + " has no production version");
    version = prod->version;
  }

  for (const auto& d : deployments()) {
    if (d.manifest.endpoint == manifest.endpoint && d.manifest.deployment_name != manifest.deployment_name) {
      fail(ErrorCode::kEndpointConflict, "endpoint " + manifest.endpoint + " is served by " + d.manifest.deployment_name);
    }
  }

  const auto marker = dir() / "packaged" / manifest.model_name / (std::to_string(version) + ".json");
  PackagedModel pkg = fs::exists(marker) ? package(read_json(marker).at("package_hash").get<std::string>())
                                         : package_model(manifest.model_name, version);
  auto predictor = load_predictor(pkg);

  Deployment d;
  d.manifest = manifest;
  d.model_version = version;
  d.package_hash = pkg.package_hash;
  d.deployed_at = store_.clock().now();
  {
    std::lock_guard lk(mu_);
    write_json_atomic(dir() / "deployments" / (manifest.deployment_name + ".json"), d.to_json());
    live_[manifest.deployment_name] = std::make_shared<const Live>(Live{d, std::move(predictor)});
  }
  return d;
}

std::vector<Deployment> Gateway::deployments() const {
  std::vector<Deployment> out;
  const auto d = dir() / "deployments";
  if (!fs::exists(d)) return out;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.path().extension() == ".json") out.push_back(Deployment::from_json(read_json(e.path())));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.manifest.deployment_name < b.manifest.deployment_name;
  });
  return out;
}

Deployment Gateway::deployment(const std::string& name) const {
  const auto p = dir() / "deployments" / (name + ".json");
  if (!store::is_valid_repo_name(name) || !fs::exists(p)) fail(ErrorCode::kNotFound, "no deployment " + name);
  return Deployment::from_json(read_json(p));
}

std::optional<std::string> Gateway::deployment_for_endpoint(const std::string& endpoint) const {
  for (const auto& d : deployments()) {
    if (d.manifest.endpoint == endpoint) return d.manifest.deployment_name;
  }
  return std::nullopt;
}

std::shared_ptr<const Gateway::Live> Gateway::live(const std::string& name) {
  {
    std::lock_guard lk(mu_);
    auto it = live_.find(name);
    if (it != live_.end()) return it->second;
  }
  // Deployed by another process; load it from its record.
  const auto d = deployment(name);
  auto predictor = load_predictor(package(d.package_hash));
  std::lock_guard lk(mu_);
  auto& slot = live_[name];
  if (!slot) slot = std::make_shared<const Live>(Live{d, std::move(predictor)});
  return slot;
}

std::string Gateway::next_request_id(const std::string& deployment, const HashId& input_digest) {
  std::lock_guard lk(mu_);
  auto it = request_seq_.find(deployment);
  if (it == request_seq_.end()) {
    it = request_seq_.emplace(deployment, read_jsonl(dir() / "scoring" / (deployment + ".jsonl")).size()).first;
  }
  const uint64_t seq = ++it->second;
  if (!store_.clock().deterministic()) return random_uuid();
  return uuid_from_name("request/" + deployment + "/" + std::to_string(seq) + "/" + input_digest);
}

Prediction Gateway::predict(const std::string& deployment, std::string_view body) {
  const int64_t start = store_.clock().now_micros();
  const auto snapshot = live(deployment);
  const auto& pred = *snapshot->predictor;
  const HashId digest = sha256_hex(body);

  json record = {{"request_id", next_request_id(deployment, digest)},
                 {"received_at", store_.clock().now()},
                 {"deployment_name", deployment},
                 {"model_version", snapshot->deployment.model_version},
                 {"package_hash", snapshot->deployment.package_hash},
                 {"input_digest", digest}};
  const auto log = dir() / "scoring" / (deployment + ".jsonl");
  try {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("data")) {
      fail(ErrorCode::kMalformedPayload, "request body must be a JSON object with a data field");
    }
    auto [cls, scores] = pred.predict(parsed.at("data"));
    Prediction p;
    p.class_id = cls;
    p.label = pred.classes()[cls];
    p.scores = std::move(scores);
    p.classes = pred.classes();
    p.model_version = snapshot->deployment.model_version;
    p.request_id = record.at("request_id").get<std::string>();
    const json pj = p.to_json();
    record["status"] = "ok";
    record["prediction"] = {{"label", p.label}, {"scores", pj.at("scores")}};
    record["latency_us"] = store_.clock().now_micros() - start;
    append_line(log, record.dump());
    return p;
  } catch (const Error& e) {
    record["status"] = "error";
    record["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    record["latency_us"] = store_.clock().now_micros() - start;
    append_line(log, record.dump());
    if (e.code() == ErrorCode::kMalformedPayload || e.code() == ErrorCode::kShapeMismatch) {
      fail(ErrorCode::kMalformedPayload, e.what());
    }
    throw;
  }
}

std::vector<json> Gateway::scoring(const std::string& deployment_name, std::optional<int64_t> since) const {
  (void)deployment(deployment_name);
  std::vector<json> out;
  for (auto& r : read_jsonl(dir() / "scoring" / (deployment_name + ".jsonl"))) {
    if (!since || r.at("received_at").get<int64_t>() >= *since) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dlflow::serving
