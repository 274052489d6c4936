// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irshield::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitRuntime = 4;

int run(int argc, char** argv);
// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "a:b:step" (inclusive) or "v1,v2,...".
std::vector<double> parse_values(const std::string& text);

}  // namespace irshield::cli
