#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "activeflow/core_types.hpp"

namespace activeflow {

// Scalar observables of one time level.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;         // ⟨f⟩, the space-angle mean
  double l2_to_const = 0.0;  // ‖f − ⟨f₀⟩‖_{L²(Υ)}
  double linf = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double grad_l2 = 0.0;  // ‖∇_ξ f‖_{L²(Υ)}
  double spectral_tail = 0.0;
  std::vector<double> lp_ladder;  // ‖f‖_{L^{2^k}(Υ)}, k = 0..k_max
};

struct Trajectory {
  explicit Trajectory(const GridSpec& g) : grid(g) {}

  GridSpec grid;
  Params params;
  double reference_mean = 0.0;  // ⟨f₀⟩
  std::vector<double> times;    // one entry per snapshot
  std::vector<std::int64_t> snapshot_steps;
  std::vector<Field3> snapshots;
  std::vector<DiagnosticsRecord> diagnostics;  // one entry per step, step 0 included
  std::optional<Field3> final_field;
  std::size_t cfl_warnings = 0;
};

}  // namespace activeflow
