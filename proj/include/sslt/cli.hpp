#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace sslt {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Run one subcommand (synth, track, run, eval, overlay). `args` excludes the
/// program name. Returns 0 on success, 1 on runtime errors, 2 on usage or
/// config schema errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace sslt
