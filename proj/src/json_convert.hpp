// Copyright 2026 The lsreward Authors
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

// Internal nlohmann::json conversions shared by the model, batch and dataset
// code. Not part of the installed API.

#pragma once

#include <string>

#include "json.hpp"
#include "lsr/constraint_model.hpp"

namespace lsr::detail {

using nlohmann::json;

// `path` is a JSON-pointer-like location used in error messages.
LogicNode tree_from_json(const json& node, const std::string& path);
json tree_to_json(const LogicNode& tree);

ConstraintSpec spec_from_json(const json& leaf, const std::string& path);
json spec_to_json(const ConstraintSpec& spec);

Params params_from_json(const json& params, const std::string& path);
json params_to_json(const Params& params);

InstructionRecord record_from_json(const json& row, const std::string& path);
json record_to_json(const InstructionRecord& record);

}  // namespace lsr::detail
