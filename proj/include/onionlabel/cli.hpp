#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "onionlabel/oua_solver.hpp"

namespace onionlabel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitBadInput = 2;  // unreadable or malformed input, bad flags
inline constexpr int kExitAnneal = 3;

/// Flat `key = value` lines; `#` starts a comment. Keys are SolverConfig field
/// names. Unknown keys and malformed values throw ParseError.
SolverConfig parse_config(std::istream& in, SolverConfig base = {});
SolverConfig load_config(const std::string& path, SolverConfig base = {});

/// `args` excludes the program name. Normal output goes to `out`; usage text
/// and CLI errors go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace onionlabel::cli
