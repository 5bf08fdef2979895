#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowdir {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 compute error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitCompute = 3;

// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace flowdir
