#pragma once

// Subcommands behind the `imave` executable.
//
//   imave fit        --model I1 --d 1 --output basis.csv --report report.json
//   imave generate   --model II2 --p 5 --n 200 --seed 7 --output data.csv
//   imave replicate  --model I1 --method ch-imave --replications 100 --output reps.csv --summary summary.csv
//   imave select-dim --dataset data.csv
//
// Every key of the configuration file is also a flag (--key value); flags win
// over `--config file`. `--emit-config file` writes the effective configuration.

#include "imave/config.hpp"

#include <iosfwd>

namespace imave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Maps the library's exception types onto the exit codes above.
[[nodiscard]] int exit_code_for(const std::exception& e) noexcept;

// Runs a validated configuration; informational output goes to `out`.
// Returns kExitNumerical when replicate flags more than 10% failed replications.
int run_command(const RunConfig& config, std::ostream& out);

// Parses argv and runs the subcommand. Never throws; errors are reported on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace imave
