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

#ifndef EVERYSEARCH_APP_WIRE_H_
#define EVERYSEARCH_APP_WIRE_H_

#include <span>
#include <string>
#include <string_view>

#include "everysearch/engine.h"

namespace everysearch::app {

// JSON shapes shared by `query --json` and the HTTP server. Field order is
// fixed and scores carry at most six decimals.
//
//   hit:  {"item_id": str, "name": str, "kind": "file"|"class"|"symbol"|"action",
//          "score": num, "source": "standard"|"semantic"}
//   done: {"query": str, "results": [hit...]} plus "warning": str when the
//         query embedded to a degenerate vector.
//
// Event stream framing (text/event-stream):
//   event: hit\ndata: <hit json>\n\n   (zero or more)
//   event: done\ndata: <done json>\n\n (exactly one, last)

double wire_score(float score);

std::string hit_json(const SearchHit& hit);
std::string done_json(std::string_view query, std::span<const SearchHit> results,
                      std::string_view warning = {});
std::string done_json(std::string_view query, const SearchResponse& response);

std::string sse_event(std::string_view event, std::string_view data);

}  // namespace everysearch::app

#endif  // EVERYSEARCH_APP_WIRE_H_
