#ifndef DFMSYNTH_CLI_H_
#define DFMSYNTH_CLI_H_

#include <ostream>

namespace dfmsynth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitCertificate = 4;

// Subcommands: abstract, gain, synthesize, simulate, certify, demo-tank.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfmsynth

#endif  // DFMSYNTH_CLI_H_
