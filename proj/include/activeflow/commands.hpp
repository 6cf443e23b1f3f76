#pragma once

#include <filesystem>
#include <ostream>
#include <string_view>

#include "activeflow/io.hpp"

namespace activeflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitRuntimeError = 2;

// Each command writes its report to `out` and returns an exit code. Library
// errors propagate; run_command turns them into JSON on `err` and exit 2.
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_decay(const RunConfig& config, std::ostream& out);
int cmd_stationary(const RunConfig& config, std::ostream& out);
int cmd_oracle_compare(const RunConfig& config, std::ostream& out);

// Reads ACTIVEFLOW_THREADS (a positive integer) and caps the transform
// threads accordingly. Returns the thread count in use.
int configure_threads_from_env();

int run_command(std::string_view name, const std::filesystem::path& config_path,
                std::ostream& out, std::ostream& err);

std::string error_json(std::string_view kind, std::string_view message, std::int64_t step = -1);

}  // namespace activeflow
