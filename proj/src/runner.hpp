// Command implementations behind the CLI: each takes a validated run
// configuration and executes one pipeline step (generate, train, predict,
// evaluate, forces, wss), writing its declared output files. All failures
// are reported through the library exception types, which the C interface
// and the CLI map to stable status codes.
#ifndef HFM_RUNNER_HPP
#define HFM_RUNNER_HPP

#include <string>

#include "runconfig.hpp"

namespace hfm {

/// Library version string (also exposed through the C interface).
const char* version_string();

/// Runs one subcommand ("generate", "train", "predict", "evaluate",
/// "forces", "wss") against the configuration. Unknown command names are
/// invalid input. Progress and summaries go to stdout; outputs go to the
/// files named in the config.
void run_command(const RunConfig& cfg, const std::string& command);

void cmd_generate(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_forces(const RunConfig& cfg);
void cmd_wss(const RunConfig& cfg);

} // namespace hfm

#endif
