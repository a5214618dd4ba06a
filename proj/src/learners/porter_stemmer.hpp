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
#include <string_view>

namespace dlflow::learners {

// Classic Porter suffix stripper (steps 1a through 5b) as distributed in the
// reference implementation: words of one or two letters are returned as-is,
// step 2 maps -bli to -ble and -logi to -log. Input is expected to be a
// lowercase ASCII word; anything containing other characters is returned
// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace dlflow::learners
