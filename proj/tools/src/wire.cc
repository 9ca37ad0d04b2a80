// Copyright 2026 The EverySearch Authors.
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

#include "everysearch/app/wire.h"

#include <cmath>

#include "json.hpp"

namespace everysearch::app {
namespace {

using Json = nlohmann::ordered_json;

Json hit_object(const SearchHit& hit) {
  Json j;
  j["item_id"] = hit.item_id;
  j["name"] = hit.name;
  j["kind"] = std::string(to_string(hit.kind));
  j["score"] = wire_score(hit.score);
  j["source"] = std::string(to_string(hit.source));
  return j;
}

std::string dump(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

double wire_score(float score) { return std::round(double{score} * 1e6) / 1e6; }

std::string hit_json(const SearchHit& hit) { return dump(hit_object(hit)); }

std::string done_json(std::string_view query, std::span<const SearchHit> results,
                      std::string_view warning) {
  Json j;
  j["query"] = std::string(query);
  j["results"] = Json::array();
  for (const SearchHit& hit : results) j["results"].push_back(hit_object(hit));
  if (!warning.empty()) j["warning"] = std::string(warning);
  return dump(j);
}

std::string done_json(std::string_view query, const SearchResponse& response) {
  return done_json(query, response.merged, response.semantic.warning);
}

std::string sse_event(std::string_view event, std::string_view data) {
  std::string out;
  out.reserve(event.size() + data.size() + 16);
  out.append("event: ").append(event).append("\n");
  out.append("data: ").append(data).append("\n\n");
  return out;
}

}  // namespace everysearch::app
