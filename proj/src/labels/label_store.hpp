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
#include <string>
#include <utility>
#include <vector>

#include "common/fs.hpp"
#include "store/data_store.hpp"

namespace dlflow::labels {

enum class Split { kTrain, kTest };

const char* to_string(Split split) noexcept;
Split parse_split(const std::string& s);

struct LabelRecord {
  Split split = Split::kTrain;
  std::string repo;
  HashId commit;
  std::string path;
  std::string label;
  std::string labeler;
  int64_t labeled_at = 0;
  // branch@commit as seen at import time
  std::string dataset_version;

  [[nodiscard]] json to_json() const;
  static LabelRecord from_json(const json& j);
};

// Ground-truth labels pinned to (split, repo, commit, path).
//
// Records for one (split, repo, commit) live in a single document at
// labels/<split>/<repo>/<commit>.json, replaced atomically on import.
class LabelStore {
 public:
  explicit LabelStore(store::DataStore& store);

  // Label file rows: {"path", "label", "labeler"?, "timestamp"?}, one JSON
  // object per line. All rows are validated before anything is written.
  std::size_t import_labels(const std::string& repo, const std::string& ref,
                            const std::string& label_file_path, Split split,
                            const std::string& importer);

  // Derives labels from a `<prefix><category>/<file>` path convention.
  std::size_t auto_label(const std::string& repo, const std::string& ref,
                         const std::string& prefix, Split split,
                         const std::string& labeler);

  std::size_t put_records(const std::string& repo, const store::Commit& commit,
                          Split split, std::vector<LabelRecord> records);

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> query_labels(
      Split split, const std::string& repo, const std::string& ref) const;
  [[nodiscard]] std::vector<LabelRecord> records(Split split, const std::string& repo,
                                                 const HashId& commit) const;

 private:
  [[nodiscard]] fs::path doc_path(Split split, const std::string& repo,
                                  const HashId& commit) const;

  store::DataStore& store_;
};

}  // namespace dlflow::labels
