// cli.hpp: command-line front end (run, sweep, trace, validate, schedule).

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magnon {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magnon
