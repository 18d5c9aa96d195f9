#pragma once

#include <iosfwd>
#include <string>

#include "blight/config.hpp"

namespace blight {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;   ///< bad configuration or I/O failure
inline constexpr int kExitAborted = 3;  ///< the experiment could not finish

struct CommandOptions {
  std::string out_dir = "out";
  unsigned threads = 0;  ///< 0 = all cores
  bool progress = false;  ///< per-sample progress lines on `err`
};

/// Each command validates `cfg`, runs, writes its files into out_dir and
/// returns an exit code. Human-readable results go to `out`, warnings and
/// errors to `err`. Nothing is thrown.
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_wave(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sobol(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);

int run_command(Experiment which, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err);

}  // namespace blight
