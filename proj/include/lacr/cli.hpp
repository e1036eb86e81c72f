#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lacr {

// Entry point of the `lacr` command-line tool. Returns the process exit
// status: 0 on success, 1 on a data or runtime error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lacr
