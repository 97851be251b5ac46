// Copyright 2026 The Lineage Authors.
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

#include <nlohmann/json.hpp>

namespace lineage {

/// Finds the first well-formed JSON object in a model reply. Code fences and
/// surrounding prose are skipped, and trailing commas before a closing
/// bracket are removed. No other repair is attempted. Throws FormatError
/// when no object can be recovered.
nlohmann::json extract_json_object(std::string_view raw);

/// Drops commas that directly precede '}' or ']' outside string literals.
std::string strip_trailing_commas(std::string_view text);

}  // namespace lineage
