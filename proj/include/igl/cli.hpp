#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace igl {

// Exit status: 0 success, 1 validation or usage error, 2 runtime error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace igl
