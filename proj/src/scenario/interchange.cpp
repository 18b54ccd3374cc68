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

#include "trajssl/scenario/interchange.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>

namespace trajssl::scenario
{
namespace
{
using nlohmann::json;

json points_to_json(const std::vector<TrajPoint> & points)
{
  json out = json::array();
  for (const auto & p : points) {
    out.push_back(json::array({p.x, p.y}));
  }
  return out;
}

std::vector<TrajPoint> points_from_json(const json & arr)
{
  std::vector<TrajPoint> out;
  out.reserve(arr.size());
  for (const auto & xy : arr) {
    if (!xy.is_array() || xy.size() != 2) {
      throw ParseError("point must be an [x, y] pair");
    }
    out.push_back({xy[0].get<double>(), xy[1].get<double>()});
  }
  return out;
}

}  // namespace

std::string to_record(const Scenario & s)
{
  json agents = json::array();
  for (const auto & track : s.tracks) {
    json valid = json::array();
    for (const bool v : track.valid) {
      valid.push_back(v);
    }
    agents.push_back({
      {"id", track.id},
      {"type", std::string(to_string(track.type))},
      {"xy", points_to_json(track.points)},
      {"valid", std::move(valid)},
    });
  }
  json map = json::array();
  for (const auto & line : s.map) {
    map.push_back({{"tag", std::string(to_string(line.tag))}, {"points", points_to_json(line.points)}});
  }
  json record = {
    {"id", s.id},
    {"source", s.source},
    {"sample_rate_hz", s.sample_rate_hz},
    {"T", s.T},
    {"T_h", s.T_h},
    {"T_f", s.T_f},
    {"target_agent", s.target_agent},
    {"agents", std::move(agents)},
    {"map", std::move(map)},
  };
  if (s.native_T != s.T) {
    record["T_native"] = s.native_T;
  }
  return record.dump();
}

Scenario from_record(std::string_view line)
{
  Scenario s;
  try {
    const json record = json::parse(line);
    s.id = record.at("id").get<std::string>();
    s.source = record.at("source").get<std::string>();
    s.sample_rate_hz = record.at("sample_rate_hz").get<double>();
    s.T = record.at("T").get<int>();
    s.T_h = record.at("T_h").get<int>();
    s.T_f = record.at("T_f").get<int>();
    s.native_T = record.contains("T_native") ? record.at("T_native").get<int>() : s.T;
    s.target_agent = record.at("target_agent").get<std::string>();
    for (const auto & agent : record.at("agents")) {
      AgentTrack track;
      track.id = agent.at("id").get<std::string>();
      track.type = agent_type_from_string(agent.at("type").get<std::string>());
      track.points = points_from_json(agent.at("xy"));
      for (const auto & v : agent.at("valid")) {
        track.valid.push_back(v.get<bool>());
      }
      for (std::size_t i = 0; i < track.points.size() && i < track.valid.size(); ++i) {
        if (!track.valid[i]) {
          track.points[i] = {};
        }
      }
      s.tracks.push_back(std::move(track));
    }
    for (const auto & entry : record.at("map")) {
      Polyline line;
      line.tag = polyline_tag_from_string(entry.at("tag").get<std::string>());
      line.points = points_from_json(entry.at("points"));
      s.map.push_back(std::move(line));
    }
  } catch (const json::exception & e) {
    throw ParseError(fmt::format("malformed scenario record: {}", e.what()));
  }
  s.validate();
  return s;
}

std::vector<Scenario> read_records(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  }
  std::vector<Scenario> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.push_back(from_record(line));
    } catch (const ParseError & e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

void write_records(const std::filesystem::path & path, const std::vector<Scenario> & scenarios)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  }
  for (const auto & s : scenarios) {
    out << to_record(s) << '\n';
  }
  if (!out) {
    throw IoError(fmt::format("write to '{}' failed", path.string()));
  }
}

}  // namespace trajssl::scenario
