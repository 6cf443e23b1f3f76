#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "activeflow/core_types.hpp"

namespace activeflow {

using Complex = std::complex<double>;

enum class Axis { X1, X2, Theta };

// Signed wavenumber of FFT index `i` on an axis of even length `n`. The
// Nyquist index n/2 maps to +n/2.
constexpr int wavenumber(int i, int n) noexcept { return i <= n / 2 ? i : i - n; }

// Half-complex spectrum of a real field: indices (i₁, i₂, j) with
// j ∈ [0, n_theta/2]. Coefficients are normalised so that the (0,0,0) entry
// equals the grid mean of the field.
class Spectrum {
 public:
  explicit Spectrum(const GridSpec& grid);
  Spectrum(const GridSpec& grid, std::vector<Complex> coeffs);

  const GridSpec& grid() const noexcept { return grid_; }
  int n_half() const noexcept { return grid_.n_theta() / 2 + 1; }
  std::size_t index(int i1, int i2, int j) const noexcept {
    return (static_cast<std::size_t>(i1) * grid_.n_x() + i2) * n_half() + j;
  }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return coeffs_[i]; }

  // Coefficient of the signed mode (k₁, k₂, k_θ); negative k_θ is served
  // through Hermitian symmetry. Modes outside the grid return 0.
  Complex mode(int k1, int k2, int kt) const noexcept;

  // Σ over the full (Hermitian-completed) spectrum of |f̂_k|².
  double energy() const noexcept;

 private:
  GridSpec grid_;
  std::vector<Complex> coeffs_;
};

// Same conventions as Spectrum for fields on Ω.
class Spectrum2 {
 public:
  explicit Spectrum2(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  int n_half() const noexcept { return grid_.n_x() / 2 + 1; }
  std::size_t index(int i1, int j2) const noexcept {
    return static_cast<std::size_t>(i1) * n_half() + j2;
  }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return coeffs_[i]; }

 private:
  GridSpec grid_;
  std::vector<Complex> coeffs_;
};

Spectrum forward(const Field3& f);
Spectrum forward(const GridSpec& grid, std::span<const double> values);
Field3 inverse(const Spectrum& s);
// Inverse transform without the finiteness check performed by Field3.
std::vector<double> inverse_values(const Spectrum& s);

Spectrum2 forward(const Field2& f);
Field2 inverse(const Spectrum2& s);

Field3 deriv(const Field3& f, Axis axis);
// Dₑ·Δf + ∂θ²f, Δ acting on x only.
Field3 laplacian_xi(const Field3& f, double de);
Field2 deriv(const Field2& f, Axis axis);
Field2 laplacian(const Field2& f);

// 2/3 rule: keeps |kᵢ| ≤ floor(nᵢ/3) on every axis.
Spectrum dealias(const Spectrum& s);
void dealias_in_place(Spectrum& s) noexcept;

Field2 compute_rho(const Field3& f);
std::pair<Field2, Field2> compute_p(const Field3& f);

// 1/√λ₁ with λ₁ the smallest nonzero eigenvalue of the negative spectral
// Laplacian on ∇_ξ = (∂x₁, ∂x₂, ∂θ).
double poincare_constant(const GridSpec& grid);

// ∫|f|² dξ over Υ via Parseval.
double l2_norm_sq(const Spectrum& s) noexcept;
// ∫|∇_ξ f|² dξ over Υ via Parseval.
double grad_norm_sq(const Spectrum& s) noexcept;

// Sets the number of threads FFT plans created afterwards may use. The
// ACTIVEFLOW_THREADS environment variable supplies the initial value.
void set_fft_threads(int n);

}  // namespace activeflow
