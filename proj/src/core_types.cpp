#include "activeflow/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <type_traits>

#include "activeflow/error.hpp"
#include "activeflow/spectral.hpp"

namespace activeflow {
namespace {

// Round-off allowance when comparing ρ against the upper bound 1; constant
// data at the boundary must be accepted.
constexpr double kRhoBoundSlack = 1e-12;

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
    }
  }
}

std::vector<double> sample_single_mode(const SingleModeData& d, const GridSpec& g) {
  const double base = d.mass / kBoxVolume;
  std::vector<double> v(g.size());
  for (int i1 = 0; i1 < g.n_x(); ++i1)
    for (int i2 = 0; i2 < g.n_x(); ++i2)
      for (int it = 0; it < g.n_theta(); ++it) {
        const double phase = d.mode[0] * g.x(i1) + d.mode[1] * g.x(i2) + d.mode[2] * g.theta(it);
        v[g.index(i1, i2, it)] = base * (1.0 + d.amplitude * std::cos(phase));
      }
  return v;
}

std::vector<double> sample_random(const RandomBandlimitedData& d, const GridSpec& g) {
  const int n = g.n_x(), nt = g.n_theta();
  const int K = d.max_mode;
  std::mt19937_64 rng(d.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Spectrum s(g);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      for (int j = 0; j < s.n_half(); ++j) {
        const double a = unit(rng);
        const double phi = kTwoPi * unit(rng);
        if (std::abs(wavenumber(i1, n)) > K || std::abs(wavenumber(i2, n)) > K || j > K) continue;
        s[s.index(i1, i2, j)] = std::polar(a, phi);
      }
    }
  }
  s[0] = 0.0;
  // The j = 0 and j = n_theta/2 planes are their own Hermitian mirror.
  for (int j : {0, nt / 2}) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n; ++i2) {
        const int m1 = (n - i1) % n, m2 = (n - i2) % n;
        if (std::make_pair(m1, m2) < std::make_pair(i1, i2)) continue;
        Complex& c = s[s.index(i1, i2, j)];
        Complex& m = s[s.index(m1, m2, j)];
        const Complex sym = 0.5 * (c + std::conj(m));
        c = sym;
        m = std::conj(sym);
      }
    }
  }

  std::vector<double> shape = inverse_values(s);
  double mean = 0.0;
  for (double x : shape) mean += x;
  mean /= static_cast<double>(shape.size());
  double peak = 0.0, lowest = 0.0;
  for (double& x : shape) {
    x -= mean;
    peak = std::max(peak, std::abs(x));
  }
  if (peak > 0.0) {
    for (double& x : shape) {
      x /= peak;
      lowest = std::min(lowest, x);
    }
  }
  // Keep min f₀ ≥ 0.01·m/(2π)³.
  double eps = d.amplitude;
  if (lowest < 0.0) eps = std::min(eps, 0.99 / -lowest);

  const double base = d.mass / kBoxVolume;
  for (double& x : shape) x = base * (1.0 + eps * x);
  return shape;
}

}  // namespace

GridSpec::GridSpec(int n_x, int n_theta) : n_x_(n_x), n_theta_(n_theta) {
  if (n_x < 4 || n_theta < 4 || n_x % 2 != 0 || n_theta % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "grid counts must be even and at least 4 (got n_x=" + std::to_string(n_x) +
                    ", n_theta=" + std::to_string(n_theta) + ")");
  }
}

GridSpec make_grid(int n_x, int n_theta) { return GridSpec(n_x, n_theta); }

void Params::validate() const {
  if (!std::isfinite(pe) || !std::isfinite(de) || !std::isfinite(dt)) {
    throw Error(ErrorKind::InvalidArgument, "parameters must be finite");
  }
  if (de <= 0.0) throw Error(ErrorKind::InvalidArgument, "de must be positive");
  if (dt <= 0.0) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
}

Field3::Field3(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {
  require_finite(values_, "Field3");
}

Field3::Field3(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::InvalidArgument, "Field3 value count does not match grid");
  }
  require_finite(values_, "Field3");
}

Field2::Field2(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.plane_size()) {
    throw Error(ErrorKind::InvalidArgument, "Field2 value count does not match grid");
  }
  require_finite(values_, "Field2");
}

std::pair<double, double> e_vec(double theta) noexcept {
  const double t = std::fmod(theta, kTwoPi);
  return {std::cos(t), std::sin(t)};
}

Field3 make_initial(const InitialDataSpec& spec, const GridSpec& grid) {
  std::vector<double> values = std::visit(
      [&grid](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        if (!std::isfinite(d.mass)) {
          throw Error(ErrorKind::InvalidArgument, "initial mass must be finite");
        }
        if constexpr (std::is_same_v<T, ConstantData>) {
          return std::vector<double>(grid.size(), d.mass / kBoxVolume);
        } else if constexpr (std::is_same_v<T, SingleModeData>) {
          if (std::abs(d.mode[0]) > grid.n_x() / 2 || std::abs(d.mode[1]) > grid.n_x() / 2 ||
              std::abs(d.mode[2]) > grid.n_theta() / 2) {
            throw Error(ErrorKind::InvalidArgument, "single_mode wavenumber is not resolved");
          }
          return sample_single_mode(d, grid);
        } else {
          if (d.max_mode < 1 || d.max_mode > std::min(grid.n_x(), grid.n_theta()) / 2) {
            throw Error(ErrorKind::InvalidArgument, "random_bandlimited max_mode out of range");
          }
          return sample_random(d, grid);
        }
      },
      spec);

  Field3 f0(grid, std::move(values));
  const AdmissibilityReport report = check_admissible(f0);
  if (!report.ok) {
    throw Error(ErrorKind::AdmissibilityViolation,
                "initial data is not admissible: min f = " + std::to_string(report.min_f) +
                    ", rho in [" + std::to_string(report.min_rho) + ", " +
                    std::to_string(report.max_rho) + "]");
  }
  return f0;
}

AdmissibilityReport check_admissible(const Field3& f0) {
  AdmissibilityReport r;
  auto v = f0.values();
  r.min_f = *std::min_element(v.begin(), v.end());
  const Field2 rho = compute_rho(f0);
  auto rv = rho.values();
  auto [lo, hi] = std::minmax_element(rv.begin(), rv.end());
  r.min_rho = *lo;
  r.max_rho = *hi;
  r.ok = r.min_f >= 0.0 && r.min_rho >= 0.0 && r.max_rho <= 1.0 + kRhoBoundSlack;
  return r;
}

}  // namespace activeflow
