// Copyright 2026 The C2F Authors. All Rights Reserved.
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

#ifndef C2F_TOOLS_CLI_H_
#define C2F_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace c2f::cli {

enum ExitCode : int {
  kOk = 0,
  kBadArgs = 2,
  kIoFailure = 3,
  kStreamMismatch = 4,
  kEvaluationFailure = 5,
};

// Runs one command line (args[0] is the program name). Payloads go to
// `out`, human-readable logs to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace c2f::cli

#endif  // C2F_TOOLS_CLI_H_
