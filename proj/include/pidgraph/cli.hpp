// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pidgraph {

/// Runs one `pidgraph` command line. Returns the process exit code:
/// 0 on success, 1 on a runtime failure, 2 on usage errors.
int dispatch(int argc, char** argv);
/// `args` excludes the program name. Interactive chat reads `in`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Stops a running `serve` command in this process.
void request_shutdown();

}  // namespace pidgraph
