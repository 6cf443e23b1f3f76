#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "activeflow/core_types.hpp"
#include "activeflow/spectral.hpp"
#include "activeflow/trajectory.hpp"

namespace activeflow {

// Right-hand side of ∂ₜf = Dₑ·Δf + ∂θ²f − Pe·div((1−ρ)·f·e(θ)).
Field3 rhs(const Field3& f, const Params& params);

// Spectrum of the advection term −Pe·div((1−ρ)·f·e(θ)), the product formed in
// physical space and truncated by the 2/3 rule when params.dealias is set.
Spectrum advection_spectrum(const Field3& f, const Params& params);

// One integrating-factor midpoint step of length params.dt. Diffusion is
// applied exactly in spectral space. Throws NumericalBlowup on non-finite
// output or a ten-fold growth of the sup norm.
Field3 step_imex(const Field3& f, const Params& params);

// 0.25·dx / max(|Pe|·max|1−ρ|, 1e−12).
double cfl_dt(const Field3& f, const Params& params);

struct RunOptions {
  std::size_t snapshot_stride = 10;
  int k_max = 6;
  double tail_fraction = 0.25;
  bool keep_snapshots = true;
  // Resuming: index of the step f0 sits at, and the ⟨f₀⟩ of the original
  // initial data. A negative reference means "take it from f0".
  std::int64_t start_step = 0;
  double reference_mean = -1.0;
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(std::int64_t step, double t, const Field3&)> on_snapshot;
  std::function<void(std::int64_t step, double t, const Field3&)> on_step;
};

// Advances f0 with uniform steps params.dt until t ≥ t_end (final time within
// one step of t_end). Requires admissible f0. NumericalBlowup carries the index
// of the failing step.
Trajectory run(const Field3& f0, const Params& params, double t_end,
               std::size_t snapshot_stride);
Trajectory run(const Field3& f0, const Params& params, double t_end, const RunOptions& options);

// Exact-step count used by run().
std::int64_t step_count(double t_end, double dt);

struct RescaleMap {
  double a = 0.0;  // Dₑ·Pe⁻²
  double b = 0.0;  // Dₑ·Pe⁻¹
  double c = 0.0;  // √Dₑ·Pe⁻¹
};

// Time/space/angle dilations that remove Pe and Dₑ from the equation.
RescaleMap rescale_problem(const Params& params);

struct RescaleCenter {
  double t0 = 0.0;
  std::array<double, 3> xi0{0.0, 0.0, 0.0};
};

// f_r(ζ) = ℓ·f(ξ₀ + r·ζ) sampled at m³ cell centres of ζ ∈ (−1,1)³,
// row-major with the angle direction fastest.
struct RescaledField {
  double ell = 0.0;
  int points_per_axis = 0;
  std::vector<double> values;
};

// ℓ = √δ·r^{3/2} / (p_norm + v_norm), no precondition on r.
double rescale_factor(double r, double delta, double norm_sum);

// Requires 0 < r < min{1, √(t₀/2)} (RadiusTooLarge otherwise). Off-grid
// values are obtained by trigonometric interpolation of f.
RescaledField rescale_field(const Field3& f, const RescaleCenter& center, double r, double delta,
                            double v_norm, double p_norm, int points_per_axis = 8);

}  // namespace activeflow
