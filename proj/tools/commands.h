// Copyright 2026 The mmhash Authors.
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


// Command-line front end: synth, train, encode, eval, search.
//
// Exit codes: 0 success, 2 argument error, 3 data or format error,
// 4 numeric failure.

#ifndef MMHASH_TOOLS_COMMANDS_H_
#define MMHASH_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace mmhash::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

inline constexpr char kToolVersion[] = "0.1.0";

// `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mmhash::cli

#endif  // MMHASH_TOOLS_COMMANDS_H_
