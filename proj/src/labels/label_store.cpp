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

#include "labels/label_store.hpp"

#include <map>
#include <sstream>

#include "common/error.hpp"

namespace dlflow::labels {

const char* to_string(Split split) noexcept {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  fail(ErrorCode::kInvalidArgument, "split must be train or test, got '" + s + "'");
}

json LabelRecord::to_json() const {
  return json{{"split", to_string(split)},  {"repo", repo},
              {"commit", commit},           {"path", path},
              {"label", label},             {"labeler", labeler},
              {"labeled_at", labeled_at},   {"dataset_version", dataset_version}};
}

LabelRecord LabelRecord::from_json(const json& j) {
  LabelRecord r;
  r.split = parse_split(j.at("split").get<std::string>());
  r.repo = j.at("repo").get<std::string>();
  r.commit = j.at("commit").get<std::string>();
  r.path = j.at("path").get<std::string>();
  r.label = j.at("label").get<std::string>();
  r.labeler = j.value("labeler", "");
  r.labeled_at = j.value("labeled_at", int64_t{0});
  r.dataset_version = j.value("dataset_version", "");
  return r;
}

LabelStore::LabelStore(store::DataStore& store) : store_(store) {}

fs::path LabelStore::doc_path(Split split, const std::string& repo, const HashId& commit) const {
  return store_.root() / "labels" / to_string(split) / repo / (commit + ".json");
}

std::size_t LabelStore::put_records(const std::string& repo, const store::Commit& commit,
                                    Split split, std::vector<LabelRecord> records) {
  const store::FileTree tree = store_.tree(commit);
  for (const auto& r : records) {
    if (r.label.empty()) fail(ErrorCode::kMalformedRow, "empty label for " + r.path);
    if (!tree.contains(r.path)) {
      fail(ErrorCode::kDanglingPath, "label references missing file: " + r.path);
    }
  }
  FileLock lock(store_.root() / "locks" / "labels" /
                (std::string(to_string(split)) + "-" + repo + "-" + commit.id + ".lock"));
  std::map<std::string, LabelRecord> merged;
  for (auto& r : this->records(split, repo, commit.id)) merged[r.path] = std::move(r);
  const std::size_t n = records.size();
  for (auto& r : records) merged[r.path] = std::move(r);
  json doc = json::array();
  for (const auto& [path, r] : merged) doc.push_back(r.to_json());
  write_atomic(doc_path(split, repo, commit.id), canonical(doc));
  return n;
}

std::size_t LabelStore::import_labels(const std::string& repo, const std::string& ref,
                                      const std::string& label_file_path, Split split,
                                      const std::string& importer) {
  const store::Commit commit = store_.resolve(repo, ref);
  const std::string text = store_.read_file(repo, commit.id, label_file_path);
  const std::string version = commit.branch + "@" + commit.id;
  std::vector<LabelRecord> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LabelRecord r;
    try {
      const json j = json::parse(line);
      r.path = j.at("path").get<std::string>();
      r.label = j.at("label").get<std::string>();
      r.labeler = j.value("labeler", importer);
      r.labeled_at = j.value("timestamp", store_.clock().now());
    } catch (const json::exception& e) {
      fail(ErrorCode::kMalformedRow, "label file line " + std::to_string(lineno) + ": " + e.what());
    }
    r.split = split;
    r.repo = repo;
    r.commit = commit.id;
    r.dataset_version = version;
    rows.push_back(std::move(r));
  }
  return put_records(repo, commit, split, std::move(rows));
}

std::size_t LabelStore::auto_label(const std::string& repo, const std::string& ref,
                                   const std::string& prefix, Split split,
                                   const std::string& labeler) {
  const store::Commit commit = store_.resolve(repo, ref);
  const std::string version = commit.branch + "@" + commit.id;
  std::vector<LabelRecord> rows;
  for (const auto& [path, blob] : store_.tree(commit)) {
    if (path.rfind(prefix, 0) != 0) continue;
    const std::string rest = path.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos || slash == 0) continue;
    LabelRecord r;
    r.split = split;
    r.repo = repo;
    r.commit = commit.id;
    r.path = path;
    r.label = rest.substr(0, slash);
    r.labeler = labeler;
    r.labeled_at = store_.clock().now();
    r.dataset_version = version;
    rows.push_back(std::move(r));
  }
  return put_records(repo, commit, split, std::move(rows));
}

std::vector<LabelRecord> LabelStore::records(Split split, const std::string& repo,
                                             const HashId& commit) const {
  std::vector<LabelRecord> out;
  const fs::path p = doc_path(split, repo, commit);
  if (!fs::exists(p)) return out;
  for (const auto& j : read_json(p)) out.push_back(LabelRecord::from_json(j));
  return out;
}

std::vector<std::pair<std::string, std::string>> LabelStore::query_labels(
    Split split, const std::string& repo, const std::string& ref) const {
  const store::Commit commit = store_.resolve(repo, ref);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : records(split, repo, commit.id)) out.emplace_back(r.path, r.label);
  return out;
}

}  // namespace dlflow::labels
