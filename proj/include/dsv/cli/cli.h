// Copyright (c) 2026 The dsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSV_CLI_CLI_H_
#define DSV_CLI_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace dsv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

// Parses argv, runs one subcommand and maps failures to exit codes:
// 1 for usage and validation errors, 2 for runtime failures.
int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::vector<std::string> SubcommandNames();
// Long flag names ("--out", ...) accepted by a subcommand.
std::vector<std::string> SubcommandFlags(const std::string& subcommand);

}  // namespace dsv::cli

#endif  // DSV_CLI_CLI_H_
