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

#include "app/commands.hpp"

#include <openssl/evp.h>

#include <functional>
#include <map>

#include "common/error.hpp"
#include "learners/learner.hpp"
#include "pipeline/utf8.hpp"

namespace dlflow::app {

namespace {

using governance::Role;
using Handler = std::function<json(Context&, const json&)>;

std::string need(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_string() || args.at(key).get<std::string>().empty()) {
    fail(ErrorCode::kInvalidArgument, std::string("missing argument '") + key + "'");
  }
  return args.at(key).get<std::string>();
}

std::string opt(const json& args, const char* key, const std::string& fallback) {
  if (!args.contains(key) || args.at(key).is_null()) return fallback;
  return args.at(key).get<std::string>();
}

int need_int(const json& args, const char* key) {
  if (!args.contains(key)) fail(ErrorCode::kInvalidArgument, std::string("missing argument '") + key + "'");
  const auto& v = args.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return n;
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCode::kInvalidArgument, std::string("argument '") + key + "' must be an integer");
}

const json& need_object(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_object()) {
    fail(ErrorCode::kInvalidArgument, std::string("argument '") + key + "' must be an object");
  }
  return args.at(key);
}

// An object under `key`, or YAML/JSON text under `<key>_text`.
json need_doc(const json& args, const char* key) {
  if (args.contains(key)) return need_object(args, key);
  const std::string text_key = std::string(key) + "_text";
  if (args.contains(text_key) && args.at(text_key).is_string()) {
    const json doc = parse_document(args.at(text_key).get<std::string>());
    if (!doc.is_object()) fail(ErrorCode::kInvalidArgument, "'" + text_key + "' must hold a map");
    return doc;
  }
  fail(ErrorCode::kInvalidArgument, std::string("missing argument '") + key + "'");
}

std::string actor(const json& args) { return opt(args, "as", ""); }

// Role checks apply once a project exists; before init the store is open.
void require(Context& ctx, const json& args, std::initializer_list<Role> roles, const std::string& action) {
  if (!ctx.has_project()) return;
  ctx.project().require(actor(args), roles, action);
}

json content_json(const std::string& bytes) {
  if (pipeline::is_valid_utf8(bytes)) return {{"content", bytes}};
  return {{"content_base64", base64_encode(bytes)}};
}

template <class T>
json to_array(const std::vector<T>& items) {
  json out = json::array();
  for (const auto& i : items) out.push_back(i.to_json());
  return out;
}

json metric_points(const std::vector<tracker::MetricPoint>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back({{"step", p.step}, {"metrics", p.values}});
  return out;
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      // data store
      {"repo.create", [](Context& c, const json& a) {
         require(c, a, {Role::kDataEngineer}, "create repos");
         return c.store().create_repo(need(a, "name")).to_json();
       }},
      {"repo.list", [](Context& c, const json&) { return to_array(c.store().list_repos()); }},
      {"repo.show", [](Context& c, const json& a) { return c.store().repo(need(a, "name")).to_json(); }},
      {"commit", [](Context& c, const json& a) {
         require(c, a, {Role::kDataEngineer}, "commit data");
         std::map<std::string, std::string> files;
         if (a.contains("files")) {
           for (const auto& [p, v] : need_object(a, "files").items()) files[p] = v.get<std::string>();
         }
         if (a.contains("files_base64")) {
           for (const auto& [p, v] : need_object(a, "files_base64").items()) {
             files[p] = base64_decode(v.get<std::string>());
           }
         }
         return c.commit(need(a, "repo"), opt(a, "branch", store::DataStore::kDefaultBranch), files,
                         opt(a, "as", "anonymous"), opt(a, "message", ""));
       }},
      {"read", [](Context& c, const json& a) {
         return content_json(c.store().read_file(need(a, "repo"), opt(a, "ref", "master"), need(a, "path")));
       }},
      {"ls", [](Context& c, const json& a) {
         json out = json::object();
         for (const auto& [p, b] : c.store().tree(c.store().resolve(need(a, "repo"), opt(a, "ref", "master")))) {
           out[p] = b;
         }
         return out;
       }},
      {"log", [](Context& c, const json& a) { return to_array(c.store().log(need(a, "repo"), opt(a, "ref", "master"))); }},
      {"diff", [](Context& c, const json& a) {
         json out = json::array();
         for (const auto& ch : c.store().diff(need(a, "repo"), need(a, "from"), need(a, "to"))) {
           out.push_back({{"path", ch.path}, {"change", store::to_string(ch.kind)}});
         }
         return out;
       }},
      // pipelines
      {"pipeline.register", [](Context& c, const json& a) {
         require(c, a, {Role::kDataEngineer}, "define pipelines");
         const auto spec = pipeline::PipelineSpec::from_json(need_doc(a, "spec"));
         return json{{"name", spec.name}, {"spec_hash", c.pipelines().register_pipeline(spec)}};
       }},
      {"pipeline.list", [](Context& c, const json&) { return to_array(c.pipelines().pipelines()); }},
      {"pipeline.show", [](Context& c, const json& a) {
         const auto spec = c.pipelines().pipeline(need(a, "name"));
         json j = spec.to_json();
         j["spec_hash"] = spec.spec_hash();
         return j;
       }},
      {"pipeline.run", [](Context& c, const json& a) {
         require(c, a, {Role::kDataEngineer}, "run pipelines");
         return c.pipelines().run_job(need(a, "name")).to_json();
       }},
      {"pipeline.run-pending", [](Context& c, const json& a) {
         require(c, a, {Role::kDataEngineer}, "run pipelines");
         return to_array(c.pipelines().run_pending());
       }},
      {"pipeline.jobs", [](Context& c, const json& a) { return to_array(c.pipelines().jobs(need(a, "name"))); }},
      {"lineage", [](Context& c, const json& a) {
         std::string commit = opt(a, "commit", "");
         if (commit.empty()) commit = c.store().resolve(need(a, "repo"), opt(a, "ref", "master")).id;
         return c.pipelines().lineage(commit).to_json();
       }},
      // labels
      {"labels.import", [](Context& c, const json& a) {
         require(c, a, {Role::kDataLabeler}, "import labels");
         const auto n = c.labels().import_labels(need(a, "repo"), opt(a, "ref", "master"), need(a, "file"),
                                                 labels::parse_split(opt(a, "split", "train")), actor(a));
         return json{{"imported", n}};
       }},
      {"labels.auto", [](Context& c, const json& a) {
         require(c, a, {Role::kDataLabeler}, "label data");
         const auto n = c.labels().auto_label(need(a, "repo"), opt(a, "ref", "master"), opt(a, "prefix", ""),
                                              labels::parse_split(opt(a, "split", "train")), actor(a));
         return json{{"labeled", n}};
       }},
      {"labels.query", [](Context& c, const json& a) {
         json out = json::object();
         for (const auto& [p, l] : c.labels().query_labels(labels::parse_split(opt(a, "split", "train")),
                                                           need(a, "repo"), opt(a, "ref", "master"))) {
           out[p] = l;
         }
         return out;
       }},
      // experiments
      {"exp.run", [](Context& c, const json& a) {
         require(c, a, {Role::kDataScientist}, "run experiments");
         const auto id = c.tracker().run_experiment(tracker::ExperimentConfig::from_json(need_doc(a, "config")));
         return c.tracker().experiment(id);
       }},
      {"exp.list", [](Context& c, const json&) { return json(c.tracker().list_experiments()); }},
      {"exp.show", [](Context& c, const json& a) { return c.tracker().experiment(need(a, "id")); }},
      {"exp.trials", [](Context& c, const json& a) { return to_array(c.tracker().trials(need(a, "id"))); }},
      {"exp.metrics", [](Context& c, const json& a) {
         return metric_points(c.tracker().metrics(need(a, "id"), need(a, "trial")));
       }},
      {"exp.best", [](Context& c, const json& a) {
         return c.tracker()
             .best_checkpoint(need(a, "id"), opt(a, "metric", "accuracy"), a.value("maximize", true))
             .to_json();
       }},
      {"exp.checkpoint", [](Context& c, const json& a) { return c.tracker().checkpoint(need(a, "id")).to_json(); }},
      {"learners", [](Context& c, const json&) { return json(c.tracker().learners().ids()); }},
      // model registry
      {"model.register", [](Context& c, const json& a) {
         registry::ModelRegistry::Registration r;
         r.name = need(a, "name");
         r.checkpoint = need(a, "checkpoint");
         r.experiment = opt(a, "experiment", "");
         r.source_snapshot = opt(a, "source_snapshot", "");
         r.creator = actor(a);
         r.description = opt(a, "description", "");
         if (a.contains("dependencies")) r.dependencies = a.at("dependencies").get<std::vector<std::string>>();
         return c.registry().register_model(r).to_json();
       }},
      {"model.metrics", [](Context& c, const json& a) {
         require(c, a, {Role::kDataScientist}, "attach test metrics");
         tracker::Metrics m;
         for (const auto& [k, v] : need_object(a, "metrics").items()) m[k] = v.get<double>();
         return c.registry().attach_test_metrics(need(a, "name"), need_int(a, "version"), m).to_json();
       }},
      {"model.evaluate", [](Context& c, const json& a) {
         require(c, a, {Role::kDataScientist}, "evaluate models");
         const auto name = need(a, "name");
         const int version = need_int(a, "version");
         const auto v = c.registry().version(name, version);
         tracker::DataSource src;
         src.repo = need(a, "repo");
         src.ref = opt(a, "ref", "master");
         src.split = opt(a, "split", "test");
         src.prefix = opt(a, "prefix", "");
         const auto learner = c.tracker().restore_learner(c.tracker().checkpoint(v.checkpoint));
         tracker::Metrics m;
         for (const auto& [k, x] : learner->evaluate_dataset(c.tracker().load_dataset(src))) m["test_" + k] = x;
         return c.registry().attach_test_metrics(name, version, m).to_json();
       }},
      {"model.submit", [](Context& c, const json& a) {
         return c.registry().submit(need(a, "name"), need_int(a, "version"), actor(a)).to_json();
       }},
      {"model.review", [](Context& c, const json& a) {
         if (!a.contains("approve") || !a.at("approve").is_boolean()) {
           fail(ErrorCode::kInvalidArgument, "argument 'approve' must be true or false");
         }
         return c.registry()
             .review(need(a, "name"), need_int(a, "version"), a.at("approve").get<bool>(), actor(a), opt(a, "note", ""))
             .to_json();
       }},
      {"model.promote", [](Context& c, const json& a) {
         return c.registry().promote_to_production(need(a, "name"), need_int(a, "version"), actor(a)).to_json();
       }},
      {"model.list", [](Context& c, const json&) { return json(c.registry().models()); }},
      {"model.show", [](Context& c, const json& a) {
         const auto name = need(a, "name");
         if (a.contains("version")) return c.registry().version(name, need_int(a, "version")).to_json();
         json out = {{"name", name}, {"versions", to_array(c.registry().versions(name))}};
         const auto prod = c.registry().production(name);
         out["production"] = prod ? json(prod->version) : json(nullptr);
         return out;
       }},
      {"model.history", [](Context& c, const json& a) { return json(c.registry().history(need(a, "name"))); }},
      {"model.events", [](Context& c, const json& a) { return json(c.registry().events(need(a, "name"))); }},
      {"model.package", [](Context& c, const json& a) {
         require(c, a, {Role::kDevopsEngineer}, "package models");
         std::optional<json> wrapper;
         if (a.contains("wrapper") || a.contains("wrapper_text")) wrapper = need_doc(a, "wrapper");
         return c.gateway().package_model(need(a, "name"), need_int(a, "version"), wrapper).to_json();
       }},
      // serving
      {"deploy", [](Context& c, const json& a) {
         require(c, a, {Role::kDevopsEngineer}, "deploy models");
         return c.gateway().deploy(serving::DeploymentManifest::from_json(need_doc(a, "manifest"))).to_json();
       }},
      {"deploy.list", [](Context& c, const json&) { return to_array(c.gateway().deployments()); }},
      {"deploy.show", [](Context& c, const json& a) { return c.gateway().deployment(need(a, "name")).to_json(); }},
      {"predict", [](Context& c, const json& a) {
         const auto dep = need(a, "deployment");
         if (a.contains("raw")) return c.gateway().predict(dep, std::string_view(a.at("raw").get<std::string>())).to_json();
         if (!a.contains("body")) fail(ErrorCode::kInvalidArgument, "missing argument 'body'");
         return c.gateway().predict(dep, a.at("body")).to_json();
       }},
      {"scoring", [](Context& c, const json& a) {
         std::optional<int64_t> since;
         if (a.contains("since")) since = a.at("since").get<int64_t>();
         return json(c.gateway().scoring(need(a, "deployment"), since));
       }},
      // workflow
      {"init", [](Context& c, const json& a) {
         const bool has_config = a.contains("config") || a.contains("config_text");
         governance::Project p = has_config ? governance::Project::from_json(need_doc(a, "config"))
                                            : governance::Project::standard(opt(a, "name", "default"));
         if (has_config && a.contains("name")) p.name = need(a, "name");
         return c.init_project(p, actor(a));
       }},
      {"project", [](Context& c, const json&) { return c.project().to_json(); }},
      {"step", [](Context& c, const json& a) {
         return c.advance(need(a, "step"), actor(a), opt(a, "note", ""), a.value("artifacts", json::object()));
       }},
      {"workflow.show", [](Context& c, const json& a) {
         return c.workflow().run(opt(a, "project", c.project().name)).to_json();
       }},
      {"workflow.graph", [](Context&, const json&) { return workflow::StepGraph::standard().to_json(); }},
      {"usecase", [](Context& c, const json& a) {
         UseCaseOptions o;
         if (a.contains("seed")) o.seed = a.at("seed").get<uint64_t>();
         return c.run_use_case(need(a, "which"), o);
       }},
      {"trace", [](Context& c, const json& a) { return c.trace(need(a, "model"), need_int(a, "version")); }},
  };
  return table;
}

}  // namespace

json dispatch(Context& ctx, const std::string& op, const json& args) {
  const auto& table = handlers();
  const auto it = table.find(op);
  if (it == table.end()) fail(ErrorCode::kInvalidArgument, "unknown command '" + op + "'");
  if (!args.is_object() && !args.is_null()) fail(ErrorCode::kInvalidArgument, "arguments must be an object");
  return it->second(ctx, args.is_null() ? json::object() : args);
}

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : handlers()) out.push_back(name);
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorCode::kInvalidArgument, "base64 length must be a multiple of 4");
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) fail(ErrorCode::kInvalidArgument, "invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the padding bytes.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace dlflow::app
