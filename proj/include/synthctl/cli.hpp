#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace synthctl {

/// Subcommands: ingest, index, run, eval, invert-debug. Returns the process
/// exit status; Indeterminate verdicts count as success.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

} // namespace synthctl
