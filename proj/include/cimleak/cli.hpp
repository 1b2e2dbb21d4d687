/* Copyright 2026 The CIMLeak Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CIMLEAK_CLI_HPP_
#define CIMLEAK_CLI_HPP_

#include <iosfwd>

namespace cimleak {

// Entry point of the `cimleak` tool: subcommands simulate, features, noise,
// export, plot and lut. Returns 0 on success, 2 for usage errors and 1 when a
// run fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cimleak

#endif  // CIMLEAK_CLI_HPP_
