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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "common/clock.hpp"
#include "common/fs.hpp"
#include "common/hash.hpp"

namespace dlflow::store {

// Sorted by byte value of the path.
using FileTree = std::map<std::string, HashId>;

struct Commit {
  HashId id;
  std::string repo;
  std::string branch;
  std::optional<HashId> parent;
  HashId tree;
  std::string author;
  std::string message;
  int64_t timestamp = 0;

  [[nodiscard]] json to_json() const;
  static Commit from_json(const json& j);
};

struct RepoInfo {
  std::string name;
  std::map<std::string, std::optional<HashId>> branches;

  [[nodiscard]] json to_json() const;
};

enum class ChangeKind { kAdded, kRemoved, kModified };

const char* to_string(ChangeKind kind) noexcept;

struct Change {
  std::string path;
  ChangeKind kind;

  auto operator<=>(const Change&) const = default;
};

// Blobs live under objects/<2 hex>/<62 hex>; writes are idempotent.
class ObjectStore {
 public:
  explicit ObjectStore(fs::path dir) : dir_(std::move(dir)) {}

  HashId put(std::string_view content) const;
  [[nodiscard]] std::string get(const HashId& id) const;
  [[nodiscard]] bool contains(const HashId& id) const;
  [[nodiscard]] std::size_t size(const HashId& id) const;

 private:
  [[nodiscard]] fs::path path_for(const HashId& id) const;
  fs::path dir_;
};

std::string serialize_tree(const FileTree& tree);
FileTree parse_tree(std::string_view text);

// Rejects absolute paths, empty segments and `.`; `..` is a path escape.
void validate_path(std::string_view path);

bool is_valid_repo_name(std::string_view name) noexcept;
bool is_valid_branch_name(std::string_view name) noexcept;

// Repos, branches and commits over a content-addressed object store.
//
// On-disk layout under the root:
//   objects/<xx>/<rest>          blobs, trees and commit records
//   repos/<name>/repo.json       repo metadata
//   repos/<name>/refs/<branch>   branch head (empty file for no head)
//   repos/<name>/commits.log     commit ids in creation order
//   locks/                       per-(repo, branch) writer locks
class DataStore {
 public:
  using CommitListener = std::function<void(const Commit&)>;

  DataStore(fs::path root, Clock clock);

  static constexpr const char* kDefaultBranch = "master";

  RepoInfo create_repo(const std::string& name);
  // Reserved internal repos (leading underscore) skip the charset rule.
  RepoInfo ensure_repo(const std::string& name);
  [[nodiscard]] bool has_repo(const std::string& name) const;
  [[nodiscard]] RepoInfo repo(const std::string& name) const;
  [[nodiscard]] std::vector<RepoInfo> list_repos() const;

  struct CommitOptions {
    // Merge into the parent tree instead of replacing it.
    bool overlay = false;
    std::optional<int64_t> timestamp;
    bool notify = true;
  };

  Commit commit_files(const std::string& repo, const std::string& branch,
                      const std::map<std::string, std::string>& files,
                      const std::string& author, const std::string& message,
                      const CommitOptions& options);
  Commit commit_files(const std::string& repo, const std::string& branch,
                      const std::map<std::string, std::string>& files,
                      const std::string& author, const std::string& message) {
    return commit_files(repo, branch, files, author, message, CommitOptions{});
  }

  // Commits a tree of already stored blobs. `before_publish` runs after the
  // commit object is written and before the branch head moves.
  Commit commit_tree(const std::string& repo, const std::string& branch,
                     const FileTree& tree, const std::string& author,
                     const std::string& message, const CommitOptions& options,
                     const std::function<void(const Commit&)>& before_publish = {});

  // A ref is a branch name, a full commit id or a unique id prefix (>= 7).
  [[nodiscard]] Commit resolve(const std::string& repo, const std::string& ref) const;
  [[nodiscard]] std::optional<Commit> head(const std::string& repo,
                                           const std::string& branch) const;
  [[nodiscard]] Commit get_commit(const HashId& id) const;
  [[nodiscard]] bool has_commit(const HashId& id) const;
  [[nodiscard]] FileTree tree(const Commit& commit) const;

  [[nodiscard]] std::string read_file(const std::string& repo,
                                      const std::string& ref,
                                      const std::string& path) const;
  [[nodiscard]] std::set<Change> diff(const std::string& repo, const std::string& from,
                                      const std::string& to) const;
  // Parent walk from ref back to the root commit.
  [[nodiscard]] std::vector<Commit> log(const std::string& repo,
                                        const std::string& ref) const;

  void add_listener(CommitListener listener);

  [[nodiscard]] const ObjectStore& objects() const noexcept { return objects_; }
  [[nodiscard]] const Clock& clock() const noexcept { return clock_; }
  [[nodiscard]] const fs::path& root() const noexcept { return root_; }

 private:
  [[nodiscard]] fs::path repo_dir(const std::string& name) const;
  [[nodiscard]] fs::path ref_path(const std::string& repo, const std::string& branch) const;
  void require_repo(const std::string& name) const;
  void notify(const Commit& commit);

  fs::path root_;
  Clock clock_;
  ObjectStore objects_;
  std::mutex listeners_mu_;
  std::vector<CommitListener> listeners_;
};

// Digest of a commit record's canonical form without its id field.
HashId commit_digest(const Commit& commit);

}  // namespace dlflow::store
