#pragma once

// The gsgi command line: train, eval, rollout, render, gradcheck, maps.

#include <iosfwd>
#include <string>
#include <vector>

namespace gsgi::interp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// args excludes the program name.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsgi::interp
