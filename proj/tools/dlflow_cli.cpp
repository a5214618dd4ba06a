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

// Command-line front end over the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dlflow/dlflow.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string root;
  bool deterministic = false;
  std::string actor;
  bool compact = false;
};

class Session {
 public:
  explicit Session(const Globals& g) : g_(g) {}
  ~Session() {
    if (ctx_ != nullptr) dlflow_close(ctx_);
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  dlflow_context* ctx() {
    if (ctx_ == nullptr) {
      const int rc = dlflow_open(g_.root.empty() ? nullptr : g_.root.c_str(), g_.deterministic ? 1 : -1, &ctx_);
      if (rc != DLFLOW_OK) throw Failure(rc);
    }
    return ctx_;
  }

  // Runs a command and prints its JSON result.
  int call(const std::string& op, json args) {
    if (!g_.actor.empty() && !args.contains("as")) args["as"] = g_.actor;
    char* out = nullptr;
    const int rc = dlflow_call(ctx(), op.c_str(), args.dump().c_str(), &out);
    if (rc != DLFLOW_OK) return report(rc);
    print(json::parse(out));
    dlflow_free(out);
    return 0;
  }

  void print(const json& j) const { std::cout << (g_.compact ? j.dump() : j.dump(2)) << "\n"; }

  static int report(int rc) {
    std::cerr << "error: " << dlflow_status_name(rc) << ": " << dlflow_last_error() << "\n";
    return rc;
  }

  struct Failure {
    int rc;
  };

  [[nodiscard]] const Globals& globals() const { return g_; }

 private:
  const Globals& g_;
  dlflow_context* ctx_ = nullptr;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Splits "a@b" into (a, b); `fallback` when there is no '@'.
std::pair<std::string, std::string> split_at(const std::string& s, const std::string& fallback) {
  const auto at = s.find('@');
  if (at == std::string::npos) return {s, fallback};
  return {s.substr(0, at), s.substr(at + 1)};
}

// Directory arguments contribute their files relative to the directory;
// plain files keep their base name.
std::map<std::string, std::string> collect(const std::vector<std::string>& sources) {
  std::map<std::string, std::string> files;
  for (const auto& src : sources) {
    const fs::path p(src);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        files[fs::relative(e.path(), p).generic_string()] = slurp(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files[p.filename().string()] = slurp(p);
    } else {
      throw std::runtime_error("no such file or directory: " + src);
    }
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlflow: versioned data, experiments, model registry and serving"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--root", g.root, "Store directory (default $DLFLOW_ROOT or .dlflow)");
  app.add_flag("--deterministic", g.deterministic, "Pin timestamps to the fixed epoch");
  app.add_option("--as", g.actor, "Acting actor id");
  app.add_flag("--compact", g.compact, "Print single-line JSON");

  Session session(g);
  std::function<int()> action;
  auto on = [&](CLI::App* cmd, std::function<int()> fn) { cmd->callback([&action, fn] { action = fn; }); };

  // repositories and commits
  auto* repo = app.add_subcommand("repo", "Manage dataset repositories");
  repo->require_subcommand(1);
  std::string repo_name;
  auto* repo_create = repo->add_subcommand("create", "Create a repository");
  repo_create->add_option("name", repo_name)->required();
  on(repo_create, [&] { return session.call("repo.create", {{"name", repo_name}}); });
  on(repo->add_subcommand("list", "List repositories"), [&] { return session.call("repo.list", json::object()); });
  auto* repo_show = repo->add_subcommand("show", "Show branches of a repository");
  repo_show->add_option("name", repo_name)->required();
  on(repo_show, [&] { return session.call("repo.show", {{"name", repo_name}}); });

  std::string target;
  std::vector<std::string> sources;
  std::string message;
  auto* commit = app.add_subcommand("commit", "Commit files: commit <repo>@<branch> <dir>... -m <msg>");
  commit->add_option("target", target, "<repo>[@<branch>]")->required();
  commit->add_option("sources", sources, "Directories or files")->required();
  commit->add_option("-m,--message", message);
  on(commit, [&] {
    const auto [r, branch] = split_at(target, "master");
    const auto files = collect(sources);
    std::vector<const char*> paths, data;
    std::vector<size_t> sizes;
    for (const auto& [p, bytes] : files) {
      paths.push_back(p.c_str());
      data.push_back(bytes.data());
      sizes.push_back(bytes.size());
    }
    char* out = nullptr;
    const int rc = dlflow_commit(session.ctx(), r.c_str(), branch.c_str(),
                                 g.actor.empty() ? "anonymous" : g.actor.c_str(), message.c_str(), files.size(),
                                 paths.data(), data.data(), sizes.data(), &out);
    if (rc != DLFLOW_OK) return Session::report(rc);
    session.print(json::parse(out));
    dlflow_free(out);
    return 0;
  });

  std::string locator;
  auto* read = app.add_subcommand("read", "Print a file: read <repo>@<ref>:<path>");
  read->add_option("locator", locator)->required();
  on(read, [&] {
    const auto colon = locator.find(':');
    if (colon == std::string::npos) {
      std::cerr << "error: expected <repo>@<ref>:<path>\n";
      return 2;
    }
    const auto [r, ref] = split_at(locator.substr(0, colon), "master");
    const auto path = locator.substr(colon + 1);
    char* out = nullptr;
    size_t size = 0;
    const int rc = dlflow_read_file(session.ctx(), r.c_str(), ref.c_str(), path.c_str(), &out, &size);
    if (rc != DLFLOW_OK) return Session::report(rc);
    std::fwrite(out, 1, size, stdout);
    dlflow_free(out);
    return 0;
  });

  auto* ls = app.add_subcommand("ls", "List files: ls <repo>@<ref>");
  ls->add_option("target", target)->required();
  on(ls, [&] {
    const auto [r, ref] = split_at(target, "master");
    return session.call("ls", {{"repo", r}, {"ref", ref}});
  });
  auto* log = app.add_subcommand("log", "Commit history: log <repo>@<ref>");
  log->add_option("target", target)->required();
  on(log, [&] {
    const auto [r, ref] = split_at(target, "master");
    return session.call("log", {{"repo", r}, {"ref", ref}});
  });

  std::string from, to;
  auto* diff = app.add_subcommand("diff", "Changed paths: diff <repo> <c1> <c2>");
  diff->add_option("repo", repo_name)->required();
  diff->add_option("from", from)->required();
  diff->add_option("to", to)->required();
  on(diff, [&] { return session.call("diff", {{"repo", repo_name}, {"from", from}, {"to", to}}); });

  // pipelines
  auto* pipe = app.add_subcommand("pipeline", "Define and run pipelines");
  pipe->require_subcommand(1);
  std::string file, name;
  auto* pipe_reg = pipe->add_subcommand("register", "Register a pipeline spec file");
  pipe_reg->add_option("file", file)->required()->check(CLI::ExistingFile);
  on(pipe_reg, [&] { return session.call("pipeline.register", {{"spec_text", slurp(file)}}); });
  auto* pipe_run = pipe->add_subcommand("run", "Run a pipeline on its current inputs");
  pipe_run->add_option("name", name)->required();
  on(pipe_run, [&] { return session.call("pipeline.run", {{"name", name}}); });
  on(pipe->add_subcommand("run-pending", "Run jobs queued by commits"),
     [&] { return session.call("pipeline.run-pending", json::object()); });
  on(pipe->add_subcommand("list", "List pipelines"), [&] { return session.call("pipeline.list", json::object()); });
  auto* pipe_show = pipe->add_subcommand("show", "Show a pipeline spec");
  pipe_show->add_option("name", name)->required();
  on(pipe_show, [&] { return session.call("pipeline.show", {{"name", name}}); });
  auto* pipe_jobs = pipe->add_subcommand("jobs", "List jobs of a pipeline");
  pipe_jobs->add_option("name", name)->required();
  on(pipe_jobs, [&] { return session.call("pipeline.jobs", {{"name", name}}); });

  auto* lineage = app.add_subcommand("lineage", "Provenance DAG: lineage <repo>@<commit>");
  lineage->add_option("target", target)->required();
  on(lineage, [&] {
    const auto [r, ref] = split_at(target, "master");
    return session.call("lineage", {{"repo", r}, {"ref", ref}});
  });

  // labels
  auto* labels = app.add_subcommand("labels", "Ground-truth labels");
  labels->require_subcommand(1);
  std::string split = "train", ref = "master", prefix;
  auto label_opts = [&](CLI::App* c) {
    c->add_option("--repo", repo_name)->required();
    c->add_option("--ref", ref);
    c->add_option("--split", split);
  };
  auto* lab_import = labels->add_subcommand("import", "Import a CSV label file stored in the repo");
  label_opts(lab_import);
  lab_import->add_option("--file", file, "Path of the label file inside the repo")->required();
  on(lab_import, [&] {
    return session.call("labels.import", {{"repo", repo_name}, {"ref", ref}, {"split", split}, {"file", file}});
  });
  auto* lab_auto = labels->add_subcommand("auto", "Label files by their directory under a prefix");
  label_opts(lab_auto);
  lab_auto->add_option("--prefix", prefix);
  on(lab_auto, [&] {
    return session.call("labels.auto", {{"repo", repo_name}, {"ref", ref}, {"split", split}, {"prefix", prefix}});
  });
  auto* lab_query = labels->add_subcommand("query", "Labels of a dataset version");
  label_opts(lab_query);
  on(lab_query, [&] { return session.call("labels.query", {{"repo", repo_name}, {"ref", ref}, {"split", split}}); });

  // experiments
  auto* exp = app.add_subcommand("exp", "Experiments");
  exp->require_subcommand(1);
  std::string id, trial, metric = "accuracy";
  bool maximize = true;
  auto* exp_run = exp->add_subcommand("run", "Run an experiment config (YAML or JSON)");
  exp_run->add_option("file", file)->required()->check(CLI::ExistingFile);
  on(exp_run, [&] { return session.call("exp.run", {{"config_text", slurp(file)}}); });
  on(exp->add_subcommand("list", "List experiments"), [&] { return session.call("exp.list", json::object()); });
  auto* exp_show = exp->add_subcommand("show", "Show an experiment");
  exp_show->add_option("id", id)->required();
  on(exp_show, [&] { return session.call("exp.show", {{"id", id}}); });
  auto* exp_trials = exp->add_subcommand("trials", "Trials of an experiment");
  exp_trials->add_option("id", id)->required();
  on(exp_trials, [&] { return session.call("exp.trials", {{"id", id}}); });
  auto* exp_metrics = exp->add_subcommand("metrics", "Metric series of a trial");
  exp_metrics->add_option("id", id)->required();
  exp_metrics->add_option("trial", trial)->required();
  on(exp_metrics, [&] { return session.call("exp.metrics", {{"id", id}, {"trial", trial}}); });
  auto* exp_best = exp->add_subcommand("best", "Best checkpoint by a metric");
  exp_best->add_option("id", id)->required();
  exp_best->add_option("--metric", metric);
  exp_best->add_flag("--max,!--min", maximize, "Direction (default --max)");
  on(exp_best, [&] {
    return session.call("exp.best", {{"id", id}, {"metric", metric}, {"maximize", maximize}});
  });
  auto* exp_cp = exp->add_subcommand("checkpoint", "Show a checkpoint");
  exp_cp->add_option("uuid", id)->required();
  on(exp_cp, [&] { return session.call("exp.checkpoint", {{"id", id}}); });

  // model registry
  auto* model = app.add_subcommand("model", "Model registry");
  model->require_subcommand(1);
  int version = 0;
  std::string checkpoint, description, note;
  std::vector<std::string> sets;
  auto* m_reg = model->add_subcommand("register", "Register a checkpoint as a new version");
  m_reg->add_option("name", name)->required();
  m_reg->add_option("--checkpoint", checkpoint)->required();
  m_reg->add_option("--description", description);
  on(m_reg, [&] {
    return session.call("model.register", {{"name", name}, {"checkpoint", checkpoint}, {"description", description}});
  });
  auto* m_metrics = model->add_subcommand("metrics", "Attach test metrics: --set k=v or evaluate on --repo");
  m_metrics->add_option("name", name)->required();
  m_metrics->add_option("version", version)->required();
  m_metrics->add_option("--set", sets, "test_<metric>=<value>");
  m_metrics->add_option("--repo", repo_name, "Evaluate on this dataset repo");
  m_metrics->add_option("--ref", ref);
  m_metrics->add_option("--prefix", prefix);
  m_metrics->add_option("--split", split);
  on(m_metrics, [&] {
    if (!repo_name.empty()) {
      return session.call("model.evaluate", {{"name", name},
                                             {"version", version},
                                             {"repo", repo_name},
                                             {"ref", ref},
                                             {"prefix", prefix},
                                             {"split", split == "train" ? "test" : split}});
    }
    json metrics = json::object();
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects name=value\n";
        return 2;
      }
      metrics[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return session.call("model.metrics", {{"name", name}, {"version", version}, {"metrics", metrics}});
  });
  auto version_cmd = [&](const char* verb, const char* help) {
    auto* c = model->add_subcommand(verb, help);
    c->add_option("name", name)->required();
    c->add_option("version", version)->required();
    return c;
  };
  auto* m_submit = version_cmd("submit", "Submit for review");
  on(m_submit, [&] { return session.call("model.submit", {{"name", name}, {"version", version}}); });
  bool approve = false, reject = false;
  auto* m_review = version_cmd("review", "Approve or reject a submitted version");
  auto* approve_flag = m_review->add_flag("--approve", approve);
  m_review->add_flag("--reject", reject)->excludes(approve_flag);
  m_review->add_option("--note", note);
  on(m_review, [&] {
    if (approve == reject) {
      std::cerr << "error: pass --approve or --reject\n";
      return 2;
    }
    return session.call("model.review", {{"name", name}, {"version", version}, {"approve", approve}, {"note", note}});
  });
  auto* m_promote = version_cmd("promote", "Move an approved version to production");
  on(m_promote, [&] { return session.call("model.promote", {{"name", name}, {"version", version}}); });
  auto* m_package = version_cmd("package", "Build the serving package");
  on(m_package, [&] { return session.call("model.package", {{"name", name}, {"version", version}}); });
  auto* m_show = model->add_subcommand("show", "Show a model or one version: show <name>[@<version>]");
  m_show->add_option("name", name)->required();
  on(m_show, [&] {
    const auto [n, v] = split_at(name, "");
    json args = {{"name", n}};
    if (!v.empty()) args["version"] = v;
    return session.call("model.show", args);
  });
  on(model->add_subcommand("list", "List model names"), [&] { return session.call("model.list", json::object()); });
  auto* m_hist = model->add_subcommand("history", "Stage transitions of a model");
  m_hist->add_option("name", name)->required();
  on(m_hist, [&] { return session.call("model.history", {{"name", name}}); });

  // serving
  auto* deploy = app.add_subcommand("deploy", "Apply a deployment manifest (YAML or JSON)");
  deploy->add_option("manifest", file)->required()->check(CLI::ExistingFile);
  on(deploy, [&] { return session.call("deploy", {{"manifest_text", slurp(file)}}); });
  on(app.add_subcommand("deployments", "List active deployments"),
     [&] { return session.call("deploy.list", json::object()); });

  std::string body, text;
  auto* predict = app.add_subcommand("predict", "Score one request: predict <deployment> (--body JSON | --text T)");
  predict->add_option("deployment", name)->required();
  auto* body_opt = predict->add_option("--body", body, "Raw request body");
  predict->add_option("--text", text, "Shorthand for {\"data\": TEXT}")->excludes(body_opt);
  on(predict, [&] {
    const std::string raw = text.empty() ? body : json{{"data", text}}.dump();
    char* out = nullptr;
    const int rc = dlflow_predict(session.ctx(), name.c_str(), raw.data(), raw.size(), &out);
    if (rc != DLFLOW_OK) return Session::report(rc);
    session.print(json::parse(out));
    dlflow_free(out);
    return 0;
  });

  auto* scoring = app.add_subcommand("scoring", "Scoring records");
  scoring->require_subcommand(1);
  std::optional<int64_t> since;
  auto* tail = scoring->add_subcommand("tail", "Records of a deployment");
  tail->add_option("deployment", name)->required();
  tail->add_option("--since", since, "Only records at or after this timestamp");
  on(tail, [&] {
    json args = {{"deployment", name}};
    if (since) args["since"] = *since;
    return session.call("scoring", args);
  });

  // workflow
  std::string project_name;
  auto* init = app.add_subcommand("init", "Create the project config and start the workflow");
  init->add_option("--name", project_name, "Project name");
  init->add_option("--config", file, "Project config (YAML or JSON)")->check(CLI::ExistingFile);
  on(init, [&] {
    json args = json::object();
    if (!project_name.empty()) args["name"] = project_name;
    if (!file.empty()) args["config_text"] = slurp(file);
    return session.call("init", args);
  });
  std::string step;
  json artifacts = json::object();
  std::string artifacts_text;
  auto* step_cmd = app.add_subcommand("step", "Advance the workflow: step <step-id> --as <actor>");
  step_cmd->add_option("step", step)->required();
  step_cmd->add_option("--note", note);
  step_cmd->add_option("--artifacts", artifacts_text, "JSON object of artifact ids");
  on(step_cmd, [&] {
    json args = {{"step", step}, {"note", note}};
    if (!artifacts_text.empty()) args["artifacts"] = json::parse(artifacts_text);
    return session.call("step", args);
  });
  auto* wf = app.add_subcommand("workflow", "Workflow state");
  wf->require_subcommand(1);
  on(wf->add_subcommand("show", "Current step and history"), [&] { return session.call("workflow.show", json::object()); });
  on(wf->add_subcommand("graph", "Steps, owners and edges"), [&] { return session.call("workflow.graph", json::object()); });

  std::string which;
  uint64_t seed = 7;
  auto* usecase = app.add_subcommand("usecase", "Run a scripted use case: usecase news|fashion");
  usecase->add_option("which", which)->required()->check(CLI::IsMember({"news", "fashion"}));
  usecase->add_option("--seed", seed);
  on(usecase, [&] { return session.call("usecase", {{"which", which}, {"seed", seed}}); });

  auto* trace = app.add_subcommand("trace", "Lineage of a model version: trace <model>@<version>");
  trace->add_option("target", target)->required();
  on(trace, [&] {
    const auto [m, v] = split_at(target, "");
    if (v.empty()) {
      std::cerr << "error: expected <model>@<version>\n";
      return 2;
    }
    return session.call("trace", {{"model", m}, {"version", v}});
  });

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP server");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  on(serve, [&] {
    dlflow_server* server = nullptr;
    int bound = 0;
    const int rc = dlflow_server_start(session.ctx(), host.c_str(), port, &server, &bound);
    if (rc != DLFLOW_OK) return Session::report(rc);
    session.print({{"listening", host + ":" + std::to_string(bound)}});
    std::cout.flush();
    const int wrc = dlflow_server_wait(server);
    dlflow_server_free(server);
    return wrc;
  });

  std::string op, args_text;
  auto* call = app.add_subcommand("call", "Run any command by name with JSON arguments");
  call->add_option("op", op)->required();
  call->add_option("args", args_text, "JSON object");
  on(call, [&] { return session.call(op, args_text.empty() ? json::object() : json::parse(args_text)); });
  on(app.add_subcommand("commands", "List command names accepted by call"), [&] {
    char* out = nullptr;
    const int rc = dlflow_commands(&out);
    if (rc != DLFLOW_OK) return Session::report(rc);
    std::cout << out;
    dlflow_free(out);
    return 0;
  });

  // Global options such as --as may follow any subcommand.
  std::function<void(CLI::App*)> fall = [&](CLI::App* a) {
    for (auto* sub : a->get_subcommands({})) {
      sub->fallthrough();
      fall(sub);
    }
  };
  fall(&app);

  CLI11_PARSE(app, argc, argv);
  try {
    return action ? action() : 0;
  } catch (const Session::Failure& f) {
    return Session::report(f.rc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
