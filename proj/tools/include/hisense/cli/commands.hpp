#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hisense/cli/config.hpp"
#include "hisense/error.hpp"

namespace hisense::cli {

enum ExitCode : int {
  kOk = 0,
  kDataError = 2,
  kTrainingError = 3,
  kEvaluationError = 4,
};

// A failure attributed to a named stage of a command, with its exit code.
class StageError : public Error {
 public:
  StageError(std::string stage, int code, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)), code_(code) {}
  const std::string& stage() const noexcept { return stage_; }
  int code() const noexcept { return code_; }

 private:
  std::string stage_;
  int code_;
};

struct Context {
  RunConfig config;
  std::string hash;
  std::filesystem::path out;
  std::ostream* log;
};

Context make_context(RunConfig config, std::ostream& log);

void cmd_prepare(const Context& ctx);
void cmd_train(const Context& ctx);
void cmd_roc(const Context& ctx);
void cmd_model_sweep(const Context& ctx);
void cmd_simulate(const Context& ctx);
void cmd_sweep(const Context& ctx);
void cmd_energy(const Context& ctx);
void cmd_online(const Context& ctx);
void cmd_quantize(const Context& ctx);

// Full command line: parses flags, loads the config, runs one subcommand and
// maps failures to exit codes.
int run(int argc, const char* const* argv);

}  // namespace hisense::cli
