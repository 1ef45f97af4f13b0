#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace handsmooth::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // bad flags, unreadable or schema-invalid files
inline constexpr int kExitNumerical = 2;  // diverged run, degenerate observation, failed check

// Entry point shared by the `handsmooth` binary and the tests. `args[0]` is
// the program name. Log verbosity comes from HANDSMOOTH_LOG
// (quiet | info | debug, default info).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Independent generator stream `stream` derived from a user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream);

}  // namespace handsmooth::cli
