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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dlflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_bytes(const fs::path& path);

// Writes to a sibling temp file and renames over the target.
void write_atomic(const fs::path& path, std::string_view bytes);

// Appends one line with a single O_APPEND write.
void append_line(const fs::path& path, std::string_view line);

std::vector<json> read_jsonl(const fs::path& path);

json read_json(const fs::path& path);
void write_json_atomic(const fs::path& path, const json& value);

// Sorted-key compact serialization; the input to every content digest.
std::string canonical(const json& value);

// Parses JSON, or YAML when the text does not look like JSON.
json parse_document(std::string_view text);

// Exclusive advisory lock on a lock file, released on destruction. Serializes
// both threads and processes.
class FileLock {
 public:
  explicit FileLock(const fs::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace dlflow
