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

#include <string>
#include <vector>

#include "app/context.hpp"

namespace dlflow::app {

// One entry point for every verb the CLI, the C API and the HTTP
// orchestrator expose. `args` is a JSON object; `as` names the acting
// actor where a role applies.
json dispatch(Context& ctx, const std::string& op, const json& args);

// Names accepted by dispatch(), sorted.
std::vector<std::string> command_names();

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace dlflow::app
