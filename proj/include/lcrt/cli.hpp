#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lcrt {

// exit code 0 iff the command completed; results on out, diagnostics on err
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcrt
