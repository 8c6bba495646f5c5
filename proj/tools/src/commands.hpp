#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace protosarc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Each command writes its artifacts plus effective_config.json into
// cfg.out_dir and returns an exit code. Errors propagate as exceptions.
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_crossval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_project(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_explain(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv, runs one subcommand and maps exceptions to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace protosarc::cli
