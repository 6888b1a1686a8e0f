// Copyright 2026 The Statebench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STATEBENCH_CLI_HPP_
#define STATEBENCH_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace statebench {

// Entry point of the `statebench` tool. Returns 0 on success, 2 on usage
// errors (unknown subcommand or flag, missing config file), 1 otherwise.
int run_cli(int argc, char** argv);

// Same, with explicit arguments (without the program name) and streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace statebench

#endif  // STATEBENCH_CLI_HPP_
