#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chaos_anneal::cli {

/// Runs one command line (without the program name). Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chaos_anneal::cli
