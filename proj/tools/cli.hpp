#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the mpm2d driver. `args` excludes the program name.
///
///   run <scene-file> --out <dir> [--integrator NAME] [--macro-dt S]
///       [--substeps auto|N] [--cfl C] [--frames N] [--lambda L|natural]
///       [--seed N] [--cg-tol T]
///   diff <dirA> <dirB>
///
/// Returns 0 on success, 1 on simulation or I/O failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpm::cli
