#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace activeflow {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// |Υ| = (2π)³, the measure of the space-angle box.
inline constexpr double kBoxVolume = kTwoPi * kTwoPi * kTwoPi;

// Uniform grid on (0,2π)² × (0,2π). Points are j·Δ for j in [0, n), the
// endpoint 2π being identified with 0.
class GridSpec {
 public:
  GridSpec(int n_x, int n_theta);

  int n_x() const noexcept { return n_x_; }
  int n_theta() const noexcept { return n_theta_; }
  double dx() const noexcept { return kTwoPi / n_x_; }
  double dtheta() const noexcept { return kTwoPi / n_theta_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_x_) * n_x_ * n_theta_;
  }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(n_x_) * n_x_;
  }
  std::size_t index(int i1, int i2, int it) const noexcept {
    return (static_cast<std::size_t>(i1) * n_x_ + i2) * n_theta_ + it;
  }
  double x(int i) const noexcept { return i * dx(); }
  double theta(int i) const noexcept { return i * dtheta(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int n_x_;
  int n_theta_;
};

GridSpec make_grid(int n_x, int n_theta);

struct Params {
  double pe = 0.0;
  double de = 1.0;
  double dt = 1e-2;
  bool dealias = true;

  // Throws InvalidArgument unless de > 0, dt > 0 and all values finite.
  void validate() const;
};

// Real scalar field f(x₁, x₂, θ), row-major with θ fastest.
class Field3 {
 public:
  explicit Field3(const GridSpec& grid, double fill = 0.0);
  Field3(const GridSpec& grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double at(int i1, int i2, int it) const noexcept {
    return values_[grid_.index(i1, i2, it)];
  }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

// Real field on Ω = (0,2π)², row-major (i₁, i₂).
class Field2 {
 public:
  Field2(const GridSpec& grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double at(int i1, int i2) const noexcept {
    return values_[static_cast<std::size_t>(i1) * grid_.n_x() + i2];
  }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

struct ConstantData {
  double mass = 1.0;
};

struct SingleModeData {
  double mass = 1.0;
  double amplitude = 0.1;
  std::array<int, 3> mode{1, 0, 0};
};

struct RandomBandlimitedData {
  double mass = 1.0;
  double amplitude = 0.1;
  int max_mode = 1;
  std::uint64_t seed = 0;
};

// `mass` is the total integral ∫f dξ, so the mean value is mass/(2π)³.
using InitialDataSpec =
    std::variant<ConstantData, SingleModeData, RandomBandlimitedData>;

struct AdmissibilityReport {
  double min_f = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  bool ok = false;
};

std::pair<double, double> e_vec(double theta) noexcept;

Field3 make_initial(const InitialDataSpec& spec, const GridSpec& grid);

AdmissibilityReport check_admissible(const Field3& f0);

}  // namespace activeflow
