#pragma once

#include <span>

#include "activeflow/core_types.hpp"

// Reference implementations that share no numerics with the spectral solver.
// They are slow and meant for grids of at most 16 points per axis.
namespace activeflow::oracle {

inline constexpr int kMaxOracleGrid = 16;

struct OracleConfig {
  GridSpec grid;
  double dt_fine = 1e-4;

  // dt_fine ≤ h²/(6·max(Dₑ,1)) with h the finest spacing; grid ≤ 16 per axis.
  void validate(const Params& params) const;
};

// Second-order centred differences; the advective flux (1−ρ)·f·e(θ) is
// differenced in conservative form so the discrete sum is conserved exactly.
Field3 fd_rhs(const Field3& f, const Params& params);

// Explicit Euler with fd_rhs, landing exactly on t_end.
Field3 fd_run(const Field3& f0, const Params& params, double t_end, const OracleConfig& cfg);

// Pe = 0 solution: each Fourier mode damped by e^{−(Dₑ(k₁²+k₂²)+k_θ²)t}.
Field3 exact_linear_solution(const Field3& f0, double de, double t);

// 1/√λ₁ for the dense negative spectral Laplacian on a periodic box of the
// given extents (one to three axes, each of length 2π), λ₁ its smallest
// eigenvalue on zero-mean vectors, found by shifted power iteration.
double dense_poincare(std::span<const int> dims);
double dense_poincare(const GridSpec& grid);

}  // namespace activeflow::oracle
