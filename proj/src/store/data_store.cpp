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

#include "store/data_store.hpp"

#include <algorithm>
#include <sstream>

#include "common/error.hpp"

namespace dlflow::store {
namespace {

bool is_hex_prefix(std::string_view s) {
  if (s.size() < 7 || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

json commit_body(const Commit& c) {
  json j;
  j["repo"] = c.repo;
  j["branch"] = c.branch;
  j["parent"] = c.parent ? json(*c.parent) : json(nullptr);
  j["tree"] = c.tree;
  j["author"] = c.author;
  j["message"] = c.message;
  j["timestamp"] = c.timestamp;
  return j;
}

}  // namespace

json Commit::to_json() const {
  json j = commit_body(*this);
  j["id"] = id;
  return j;
}

Commit Commit::from_json(const json& j) {
  Commit c;
  c.id = j.value("id", "");
  c.repo = j.at("repo").get<std::string>();
  c.branch = j.at("branch").get<std::string>();
  if (!j.at("parent").is_null()) c.parent = j.at("parent").get<std::string>();
  c.tree = j.at("tree").get<std::string>();
  c.author = j.at("author").get<std::string>();
  c.message = j.at("message").get<std::string>();
  c.timestamp = j.at("timestamp").get<int64_t>();
  return c;
}

HashId commit_digest(const Commit& commit) {
  return sha256_hex(canonical(commit_body(commit)));
}

json RepoInfo::to_json() const {
  json branches_json = json::object();
  for (const auto& [b, h] : branches) branches_json[b] = h ? json(*h) : json(nullptr);
  return json{{"name", name}, {"branches", branches_json}};
}

const char* to_string(ChangeKind kind) noexcept {
  switch (kind) {
    case ChangeKind::kAdded: return "added";
    case ChangeKind::kRemoved: return "removed";
    case ChangeKind::kModified: return "modified";
  }
  return "?";
}

fs::path ObjectStore::path_for(const HashId& id) const {
  return dir_ / id.substr(0, 2) / id.substr(2);
}

HashId ObjectStore::put(std::string_view content) const {
  HashId id = sha256_hex(content);
  fs::path p = path_for(id);
  if (!fs::exists(p)) write_atomic(p, content);
  return id;
}

std::string ObjectStore::get(const HashId& id) const {
  if (!is_hash_id(id)) fail(ErrorCode::kNotFound, "object not found: " + id);
  fs::path p = path_for(id);
  if (!fs::exists(p)) fail(ErrorCode::kNotFound, "object not found: " + id);
  return read_bytes(p);
}

bool ObjectStore::contains(const HashId& id) const {
  return is_hash_id(id) && fs::exists(path_for(id));
}

std::size_t ObjectStore::size(const HashId& id) const {
  if (!contains(id)) fail(ErrorCode::kNotFound, "object not found: " + id);
  return static_cast<std::size_t>(fs::file_size(path_for(id)));
}

std::string serialize_tree(const FileTree& tree) {
  std::string out = "tree\n";
  for (const auto& [path, blob] : tree) {
    out += blob;
    out += ' ';
    out += path;
    out += '\n';
  }
  return out;
}

FileTree parse_tree(std::string_view text) {
  FileTree tree;
  std::istringstream in{std::string(text)};
  std::string line;
  std::getline(in, line);
  if (line != "tree") fail(ErrorCode::kInternal, "corrupt tree object");
  while (std::getline(in, line)) {
    if (line.size() < 66) fail(ErrorCode::kInternal, "corrupt tree entry");
    tree.emplace(line.substr(65), line.substr(0, 64));
  }
  return tree;
}

void validate_path(std::string_view path) {
  if (path.empty()) fail(ErrorCode::kInvalidArgument, "empty path");
  if (path.front() == '/') {
    fail(ErrorCode::kInvalidArgument, "absolute path: " + std::string(path));
  }
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    std::string_view seg = path.substr(start, end - start);
    if (seg == "..") fail(ErrorCode::kPathEscape, "path escapes tree: " + std::string(path));
    if (seg.empty() || seg == ".") {
      fail(ErrorCode::kInvalidArgument, "malformed path: " + std::string(path));
    }
    if (seg.find('\n') != std::string_view::npos) {
      fail(ErrorCode::kInvalidArgument, "newline in path");
    }
    start = end + 1;
  }
}

bool is_valid_repo_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

bool is_valid_branch_name(std::string_view name) noexcept {
  if (name.empty() || name == "." || name == ".." || name.size() > 128) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
  });
}

DataStore::DataStore(fs::path root, Clock clock)
    : root_(std::move(root)), clock_(clock), objects_(root_ / "objects") {
  fs::create_directories(root_ / "objects");
  fs::create_directories(root_ / "repos");
}

fs::path DataStore::repo_dir(const std::string& name) const {
  return root_ / "repos" / name;
}

fs::path DataStore::ref_path(const std::string& repo, const std::string& branch) const {
  return repo_dir(repo) / "refs" / branch;
}

void DataStore::require_repo(const std::string& name) const {
  if (!has_repo(name)) fail(ErrorCode::kNotFound, "repo not found: " + name);
}

bool DataStore::has_repo(const std::string& name) const {
  if (name.empty() || name.find('/') != std::string::npos || name == "." ||
      name == "..") {
    return false;
  }
  return fs::exists(repo_dir(name) / "repo.json");
}

RepoInfo DataStore::create_repo(const std::string& name) {
  if (!is_valid_repo_name(name)) {
    fail(ErrorCode::kInvalidName, "invalid repo name '" + name +
                                      "' (allowed: [a-z0-9-]+)");
  }
  FileLock lock(root_ / "locks" / "repos.lock");
  if (has_repo(name)) fail(ErrorCode::kDuplicateName, "repo already exists: " + name);
  fs::create_directories(repo_dir(name) / "refs");
  write_atomic(ref_path(name, kDefaultBranch), "");
  write_json_atomic(repo_dir(name) / "repo.json", json{{"name", name}});
  return repo(name);
}

RepoInfo DataStore::ensure_repo(const std::string& name) {
  if (name.empty() || (!is_valid_repo_name(name) &&
                       !(name[0] == '_' && is_valid_repo_name(name.substr(1))))) {
    fail(ErrorCode::kInvalidName, "invalid repo name: " + name);
  }
  FileLock lock(root_ / "locks" / "repos.lock");
  if (!has_repo(name)) {
    fs::create_directories(repo_dir(name) / "refs");
    write_atomic(ref_path(name, kDefaultBranch), "");
    write_json_atomic(repo_dir(name) / "repo.json", json{{"name", name}});
  }
  return repo(name);
}

RepoInfo DataStore::repo(const std::string& name) const {
  require_repo(name);
  RepoInfo info;
  info.name = name;
  for (const auto& entry : fs::directory_iterator(repo_dir(name) / "refs")) {
    const std::string branch = entry.path().filename().string();
    if (branch.find(".tmp.") != std::string::npos) continue;
    std::string head = read_bytes(entry.path());
    info.branches[branch] = head.empty() ? std::nullopt : std::optional<HashId>(head);
  }
  return info;
}

std::vector<RepoInfo> DataStore::list_repos() const {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root_ / "repos")) {
    if (fs::exists(entry.path() / "repo.json")) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  std::vector<RepoInfo> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(repo(n));
  return out;
}

Commit DataStore::commit_files(const std::string& repo, const std::string& branch,
                               const std::map<std::string, std::string>& files,
                               const std::string& author, const std::string& message,
                               const CommitOptions& options) {
  require_repo(repo);
  FileTree tree;
  for (const auto& [path, bytes] : files) {
    validate_path(path);
    tree[path] = objects_.put(bytes);
  }
  return commit_tree(repo, branch, tree, author, message, options);
}

Commit DataStore::commit_tree(const std::string& repo, const std::string& branch,
                              const FileTree& tree_in, const std::string& author,
                              const std::string& message, const CommitOptions& options,
                              const std::function<void(const Commit&)>& before_publish) {
  require_repo(repo);
  if (!is_valid_branch_name(branch)) {
    fail(ErrorCode::kInvalidName, "invalid branch name: " + branch);
  }
  for (const auto& [path, blob] : tree_in) {
    validate_path(path);
    if (!objects_.contains(blob)) fail(ErrorCode::kNotFound, "blob not stored: " + blob);
  }

  Commit commit;
  {
    FileLock lock(root_ / "locks" / repo / (branch + ".lock"));
    std::optional<Commit> parent = head(repo, branch);
    FileTree tree = tree_in;
    if (options.overlay && parent) {
      FileTree base = this->tree(*parent);
      for (auto& [p, b] : tree) base[p] = b;
      tree = std::move(base);
    }
    commit.repo = repo;
    commit.branch = branch;
    if (parent) commit.parent = parent->id;
    commit.tree = objects_.put(serialize_tree(tree));
    commit.author = author;
    commit.message = message;
    commit.timestamp = options.timestamp.value_or(clock_.now());
    HashId stored = objects_.put(canonical(commit_body(commit)));
    commit.id = stored;

    // A commit becomes visible only once the branch head points at it.
    const bool known = fs::exists(repo_dir(repo) / "commits.log") && [&] {
      std::string log = read_bytes(repo_dir(repo) / "commits.log");
      return log.find(commit.id) != std::string::npos;
    }();
    if (before_publish) before_publish(commit);
    if (!known) append_line(repo_dir(repo) / "commits.log", commit.id);
    write_atomic(ref_path(repo, branch), commit.id);
  }
  if (options.notify) notify(commit);
  return commit;
}

std::optional<Commit> DataStore::head(const std::string& repo,
                                      const std::string& branch) const {
  require_repo(repo);
  fs::path p = ref_path(repo, branch);
  if (!is_valid_branch_name(branch) || !fs::exists(p)) return std::nullopt;
  std::string id = read_bytes(p);
  if (id.empty()) return std::nullopt;
  return get_commit(id);
}

Commit DataStore::get_commit(const HashId& id) const {
  if (!objects_.contains(id)) fail(ErrorCode::kNotFound, "commit not found: " + id);
  json j;
  try {
    j = json::parse(objects_.get(id));
  } catch (const json::exception&) {
    fail(ErrorCode::kNotFound, "not a commit: " + id);
  }
  if (!j.is_object() || !j.contains("tree") || !j.contains("repo")) {
    fail(ErrorCode::kNotFound, "not a commit: " + id);
  }
  Commit c = Commit::from_json(j);
  c.id = id;
  return c;
}

bool DataStore::has_commit(const HashId& id) const {
  try {
    (void)get_commit(id);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Commit DataStore::resolve(const std::string& repo, const std::string& ref) const {
  require_repo(repo);
  if (is_valid_branch_name(ref) && fs::exists(ref_path(repo, ref))) {
    auto h = head(repo, ref);
    if (!h) fail(ErrorCode::kNotFound, "branch has no commits: " + repo + "@" + ref);
    return *h;
  }
  if (is_hash_id(ref)) {
    Commit c = get_commit(ref);
    if (c.repo != repo) {
      fail(ErrorCode::kNotFound, "commit " + ref + " does not belong to repo " + repo);
    }
    return c;
  }
  if (is_hex_prefix(ref)) {
    std::vector<std::string> matches;
    std::istringstream in(fs::exists(repo_dir(repo) / "commits.log")
                              ? read_bytes(repo_dir(repo) / "commits.log")
                              : std::string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(ref, 0) == 0 &&
          std::find(matches.begin(), matches.end(), line) == matches.end()) {
        matches.push_back(line);
      }
    }
    if (matches.size() == 1) return get_commit(matches.front());
    if (matches.size() > 1) fail(ErrorCode::kInvalidArgument, "ambiguous ref: " + ref);
  }
  fail(ErrorCode::kNotFound, "ref not found: " + repo + "@" + ref);
}

FileTree DataStore::tree(const Commit& commit) const {
  return parse_tree(objects_.get(commit.tree));
}

std::string DataStore::read_file(const std::string& repo, const std::string& ref,
                                 const std::string& path) const {
  Commit c = resolve(repo, ref);
  FileTree t = tree(c);
  auto it = t.find(path);
  if (it == t.end()) {
    fail(ErrorCode::kNotFound, "path not found: " + repo + "@" + ref + ":" + path);
  }
  return objects_.get(it->second);
}

std::set<Change> DataStore::diff(const std::string& repo, const std::string& from,
                                 const std::string& to) const {
  const FileTree a = tree(resolve(repo, from));
  const FileTree b = tree(resolve(repo, to));
  std::set<Change> out;
  for (const auto& [path, blob] : a) {
    auto it = b.find(path);
    if (it == b.end()) {
      out.insert({path, ChangeKind::kRemoved});
    } else if (it->second != blob) {
      out.insert({path, ChangeKind::kModified});
    }
  }
  for (const auto& [path, blob] : b) {
    if (!a.contains(path)) out.insert({path, ChangeKind::kAdded});
  }
  return out;
}

std::vector<Commit> DataStore::log(const std::string& repo, const std::string& ref) const {
  std::vector<Commit> out;
  Commit c = resolve(repo, ref);
  std::set<HashId> seen;
  while (true) {
    if (!seen.insert(c.id).second) fail(ErrorCode::kInternal, "cycle in commit history");
    out.push_back(c);
    if (!c.parent) break;
    c = get_commit(*c.parent);
  }
  return out;
}

void DataStore::add_listener(CommitListener listener) {
  std::lock_guard lock(listeners_mu_);
  listeners_.push_back(std::move(listener));
}

void DataStore::notify(const Commit& commit) {
  std::vector<CommitListener> copy;
  {
    std::lock_guard lock(listeners_mu_);
    copy = listeners_;
  }
  for (const auto& l : copy) l(commit);
}

}  // namespace dlflow::store
