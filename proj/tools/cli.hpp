#ifndef LOGEXT_TOOLS_CLI_HPP
#define LOGEXT_TOOLS_CLI_HPP

#include <cstdint>
#include <iosfwd>

namespace logext::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240613;

// Exit codes: 0 success (validate: Pass), 1 validate Fail or internal error,
// 2 invalid input, 3 validate Inconclusive.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace logext::cli

#endif  // LOGEXT_TOOLS_CLI_HPP
