#pragma once

#include <span>
#include <utility>
#include <vector>

#include "activeflow/core_types.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/trajectory.hpp"

namespace activeflow {

struct RecordOptions {
  int k_max = 6;
  double tail_fraction = 0.25;
};

// ⟨f⟩, the grid mean. The total integral is mass(f)·(2π)³.
double mass(const Field3& f);
double total_mass(const Field3& f);
double l2_norm(const Field3& f);
double l2_distance_to_constant(const Field3& f, double c);

DiagnosticsRecord compute_record(const Field3& f, double t, double reference_mean,
                                 const RecordOptions& options = {});

// ‖f‖_P = √(max_t ‖f(t)‖²_{L²} + ∫ ‖∇_ξ f‖²_{L²} dt), both terms taken from
// the per-step records (trapezoid rule in time, exact for exponential decay).
double parabolic_norm(const Trajectory& traj);

// De Giorgi levels Cₖ = ½(1 − 2^{−k}) and start times Tₖ = −½(1 + 2^{−k}) on
// the reference interval [−1, 0].
double truncation_level(int k) noexcept;
double truncation_time(int k) noexcept;

struct TruncationLadder {
  int k_max = 0;
  std::vector<double> levels;         // Cₖ
  std::vector<double> window_starts;  // Tₖ mapped onto the analysis window
  std::vector<double> energies;       // ℰₖ
};

// ℰₖ = sup_{t ∈ [Tₖ, t_b]} ∫(f − Cₖ)₊² dξ + ∫_{Tₖ}^{t_b} ∫|1_{f>Cₖ}∇_ξ f|² dξ dt,
// evaluated on the trajectory snapshots. Cut-offs are identically one, the
// domain being periodic. WindowTooShort with fewer than k_max+1 snapshots in
// the window.
TruncationLadder truncation_energy(const Trajectory& traj, std::pair<double, double> window,
                                   int k_max);

// ‖f‖_{L^{2^k}(Υ)} for k = 0..k_max. Entries in [−1e−10, 0) are clipped to 0;
// anything more negative raises NegativeField.
std::vector<double> lp_ladder(const Field3& f, int k_max);

// Fraction of the non-mean energy carried by modes with some |kᵢ| > fraction·nᵢ.
double spectral_tail(const Field3& f, double fraction = 0.25);

struct MomentResidual {
  std::vector<double> times;
  std::vector<double> residuals;  // ‖∂ₜρ + Pe·div((1−ρ)p) − Dₑ·Δρ‖_{L²(Ω)}
};

// Residual of the θ-integrated equation at interior snapshots, ∂ₜρ by centred
// differences. TooFewSnapshots below three snapshots.
MomentResidual moment_residual(const Trajectory& traj);

// Least-squares slope of −log(value) against t over points with t in the
// closed window. TooFewPoints below 10 points, NonpositiveValue for value ≤ 0.
double fit_decay_rate(std::span<const double> t, std::span<const double> values,
                      std::pair<double, double> window);

struct RescaledTrajectory {
  double ell = 0.0;
  double parabolic_norm = 0.0;
  std::pair<double, double> window;  // [t₀ − r², t₀]
  Trajectory trajectory;             // snapshots and records multiplied by ℓ
};

// Applies the De Giorgi amplitude rescaling f ↦ ℓ·f to a trajectory and
// selects the time window of the parabolic cylinder of radius r ending at t₀.
RescaledTrajectory rescale_trajectory(const Trajectory& traj, const RescaleCenter& center,
                                      double r, double delta, double v_norm);

}  // namespace activeflow
