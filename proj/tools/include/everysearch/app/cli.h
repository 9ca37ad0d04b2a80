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

#ifndef EVERYSEARCH_APP_CLI_H_
#define EVERYSEARCH_APP_CLI_H_

#include <iosfwd>

namespace everysearch::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `everysearch` command:
///   index <root>     query <text>     train <pairs.tsv>
///   eval <dataset>   sweep <dataset> --thresholds a,b,c   serve --port N
/// Global options --home, --weights and --json apply to every subcommand.
/// Returns 0 on success, 1 on usage errors and 2 on runtime errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace everysearch::app

#endif  // EVERYSEARCH_APP_CLI_H_
