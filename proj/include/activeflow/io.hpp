#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "activeflow/core_types.hpp"
#include "activeflow/equilibrium.hpp"
#include "activeflow/trajectory.hpp"

namespace activeflow {

struct TruncationConfig {
  std::optional<std::pair<double, double>> window;  // defaults to [t_end/2, t_end]
  int k_max = 6;
};

struct DiagnosticsConfig {
  int k_max = 6;
  double tail_threshold = 0.25;  // fraction of n per axis
  TruncationConfig truncation;
};

struct StationaryConfig {
  double tol = 1e-8;
  std::optional<double> t_max;  // defaults to t_end
};

struct VerifyConfig {
  std::vector<int> checks;  // empty: every criterion
};

struct RunConfig {
  int n_x = 32;
  int n_theta = 32;
  Params params;
  bool dt_auto = false;
  InitialDataSpec initial = ConstantData{};
  double t_end = 0.0;
  std::size_t snapshot_stride = 10;
  std::string output_dir = "activeflow_out";
  DiagnosticsConfig diagnostics;
  std::int64_t checkpoint_every = 0;  // 0 disables checkpoints
  bool resume = false;
  StationaryConfig stationary;
  VerifyConfig verify;

  GridSpec grid() const { return GridSpec(n_x, n_theta); }
};

// Parses and validates a JSON document. Syntax and type errors raise
// ParseError naming the line or field; range violations raise ValidationError.
// "dt": "auto" is resolved to 0.5·cfl_dt of the initial data (at least 1e−5,
// at most t_end/100).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Stable 64-bit FNV-1a digest of the physically relevant configuration
// (t_end, output_dir and resume excluded).
std::uint64_t config_hash(const RunConfig& config);

std::string serialize_initial(const InitialDataSpec& spec);
InitialDataSpec parse_initial(const std::string& json_text);

inline constexpr int kSnapshotFormatVersion = 1;

struct SnapshotHeader {
  int n_x = 0;
  int n_theta = 0;
  double time = 0.0;
  std::int64_t step = 0;
  Params params;
  std::uint64_t config_hash = 0;
  double reference_mean = 0.0;
};

// One JSON header line followed by n_x·n_x·n_theta little-endian float64
// values, row-major (i₁, i₂, i_θ).
void write_snapshot(const std::filesystem::path& path, const Field3& f,
                    const SnapshotHeader& header);
std::pair<SnapshotHeader, Field3> read_snapshot(const std::filesystem::path& path);

std::string csv_header(int k_max);
std::string csv_row(const DiagnosticsRecord& record);

std::string to_json(const EquilibriumReport& report);

}  // namespace activeflow
