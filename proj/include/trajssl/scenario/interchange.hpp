// Copyright 2026 The trajssl Authors
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

#ifndef TRAJSSL__SCENARIO__INTERCHANGE_HPP_
#define TRAJSSL__SCENARIO__INTERCHANGE_HPP_

#include "trajssl/scenario/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trajssl::scenario
{
/**
 * @brief Line-delimited JSON scenario records.
 *
 * One record per line with fields `id`, `source`, `sample_rate_hz`, `T`, `T_h`, `T_f`,
 * `target_agent`, `agents` and `map`. A `T_native` field is written only for padded scenarios.
 */
std::string to_record(const Scenario & scenario);

/// Parses and validates one record. Throws ParseError or InvalidScenario.
Scenario from_record(std::string_view line);

std::vector<Scenario> read_records(const std::filesystem::path & path);

/// Writes one record per line. Throws IoError if the file cannot be written.
void write_records(const std::filesystem::path & path, const std::vector<Scenario> & scenarios);

}  // namespace trajssl::scenario

#endif  // TRAJSSL__SCENARIO__INTERCHANGE_HPP_
