#pragma once

#include <optional>

#include "activeflow/core_types.hpp"
#include "activeflow/trajectory.hpp"

namespace activeflow {

struct EquilibriumReport {
  double kappa = 0.0;
  double threshold = 0.0;
  bool is_small_pe = false;
  double measured_rate = 0.0;  // NaN when the run was skipped
  bool bound_satisfied = false;
  bool pointwise_bound_ok = false;
  double final_l2_to_const = 0.0;
  double initial_l2_to_const = 0.0;
  double mean = 0.0;  // ⟨f₀⟩
  double poincare = 1.0;
};

// κ = ½(½·C_P⁻²·min{Dₑ,1} − (2π)²·Pe²·(1+m)²/min{Dₑ,1}) with m = ⟨f₀⟩.
double kappa(const Params& params, double mean, double c_p);

// min{Dₑ,1} / (2√2·π·C_P·(1+m)).
double peclet_threshold(const Params& params, double mean, double c_p);

// Runs to t_end below the threshold and checks ‖w(t)‖ ≤ e^{−(κ−tol)t}‖w(0)‖
// for w = f − ⟨f₀⟩ at every step; the rate is fitted on [t_end/2, t_end].
// Above the threshold the run is skipped and is_small_pe is false. C_P
// defaults to poincare_constant(grid).
EquilibriumReport verify_small_pe_decay(const Field3& f0, const Params& params, double t_end,
                                        double tol = 1e-3, std::optional<double> c_p = {});

// ‖rhs(f)‖_{L²(Υ)}.
double stationary_residual(const Field3& f, const Params& params);

struct StationaryResult {
  Field3 field;
  double residual = 0.0;
  double time = 0.0;
  double distance_to_mean = 0.0;  // ‖field − ⟨guess⟩‖_∞
};

// Marches the equation until the residual drops below tol. NotConverged once
// t_max is reached.
StationaryResult solve_stationary(const Field3& guess, const Params& params, double tol,
                                  double t_max);

struct SpatialAverageReport {
  std::optional<double> measured_rate;  // empty for θ-independent data
  bool bound_ok = false;
  bool degenerate = false;
  double initial_deviation = 0.0;
  double final_deviation = 0.0;
};

// h(t,θ) = ∫_Ω f dx solves the heat equation in θ for every Pe; checks
// ‖h(t)−h̄‖ ≤ e^{−(1−tol)(t−s)}‖h(s)−h̄‖ over all snapshot pairs s ≤ t and fits
// the decay rate. Needs 10 snapshots.
SpatialAverageReport spatial_average_decay(const Trajectory& traj, double tol = 1e-3);

}  // namespace activeflow
