// Copyright 2026 The ergoset Authors
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

#ifndef ERGOSET_TOOLS_CLI_HPP_
#define ERGOSET_TOOLS_CLI_HPP_

#include <iosfwd>

namespace ergoset::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kFailure = 3,  // numerical error, contract violation, failed verification
};

// Entry point of the `ergoset` tool; output goes to `out` / `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ergoset::cli

#endif  // ERGOSET_TOOLS_CLI_HPP_
