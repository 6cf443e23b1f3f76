#include "activeflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "activeflow/error.hpp"

namespace activeflow::oracle {
namespace {

constexpr int kMaxPowerIterations = 100000;

// Real circulant n×n matrix (1/n)·Σ_k σ(k)·cos(k·(x_j − x_l)), k over
// −n/2+1..n/2, built by direct summation.
std::vector<double> circulant(int n, auto&& symbol) {
  const double h = kTwoPi / n;
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int k = -n / 2 + 1; k <= n / 2; ++k) acc += symbol(k) * std::cos(k * (j - l) * h);
      m[static_cast<std::size_t>(j) * n + l] = acc / n;
    }
  return m;
}

// Applies an n×n matrix along one axis of a row-major (n0, n1, n2) array.
void apply_along(std::vector<double>& v, const std::vector<double>& m, int axis, int n0, int n1,
                 int n2) {
  const int dims[3] = {n0, n1, n2};
  const int n = dims[axis];
  const std::size_t stride = axis == 0 ? static_cast<std::size_t>(n1) * n2 : axis == 1 ? n2 : 1;
  std::vector<double> line(n), out(n);
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b)
      for (int c = 0; c < n2; ++c) {
        const int pos[3] = {a, b, c};
        if (pos[axis] != 0) continue;
        const std::size_t base = (static_cast<std::size_t>(a) * n1 + b) * n2 + c;
        for (int j = 0; j < n; ++j) line[j] = v[base + j * stride];
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) acc += m[static_cast<std::size_t>(j) * n + l] * line[l];
          out[j] = acc;
        }
        for (int j = 0; j < n; ++j) v[base + j * stride] = out[j];
      }
}

}  // namespace

void OracleConfig::validate(const Params& params) const {
  if (grid.n_x() > kMaxOracleGrid || grid.n_theta() > kMaxOracleGrid) {
    throw Error(ErrorKind::InvalidArgument, "oracle grids are limited to 16 points per axis");
  }
  const double h = std::min(grid.dx(), grid.dtheta());
  const double bound = h * h / (6.0 * std::max(params.de, 1.0));
  if (!(dt_fine > 0.0) || dt_fine > bound) {
    throw Error(ErrorKind::InvalidArgument, "oracle step " + std::to_string(dt_fine) +
                                                " exceeds the explicit stability bound " +
                                                std::to_string(bound));
  }
}

Field3 fd_rhs(const Field3& f, const Params& params) {
  const GridSpec& g = f.grid();
  const int n = g.n_x(), nt = g.n_theta();
  const double dx = g.dx(), dth = g.dtheta();
  auto at = [&](int i1, int i2, int it) {
    return f.at((i1 + n) % n, (i2 + n) % n, (it + nt) % nt);
  };

  std::vector<double> rho(g.plane_size(), 0.0);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      double acc = 0.0;
      for (int it = 0; it < nt; ++it) acc += f.at(i1, i2, it);
      rho[static_cast<std::size_t>(i1) * n + i2] = acc * dth;
    }
  // Advective flux components at nodes.
  std::vector<double> flux1(g.size()), flux2(g.size());
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int it = 0; it < nt; ++it) {
        const double q = (1.0 - rho[static_cast<std::size_t>(i1) * n + i2]) * f.at(i1, i2, it);
        const double th = g.theta(it);
        flux1[g.index(i1, i2, it)] = q * std::cos(th);
        flux2[g.index(i1, i2, it)] = q * std::sin(th);
      }
  auto flux_at = [&](const std::vector<double>& fl, int i1, int i2, int it) {
    return fl[g.index((i1 + n) % n, (i2 + n) % n, it)];
  };

  std::vector<double> out(g.size());
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int it = 0; it < nt; ++it) {
        const double c = at(i1, i2, it);
        const double lap_x = (at(i1 + 1, i2, it) - 2.0 * c + at(i1 - 1, i2, it)) / (dx * dx) +
                             (at(i1, i2 + 1, it) - 2.0 * c + at(i1, i2 - 1, it)) / (dx * dx);
        const double lap_t = (at(i1, i2, it + 1) - 2.0 * c + at(i1, i2, it - 1)) / (dth * dth);
        // Face fluxes F_{i±1/2} = (F_i + F_{i±1})/2.
        const double east = 0.5 * (flux_at(flux1, i1, i2, it) + flux_at(flux1, i1 + 1, i2, it));
        const double west = 0.5 * (flux_at(flux1, i1 - 1, i2, it) + flux_at(flux1, i1, i2, it));
        const double north = 0.5 * (flux_at(flux2, i1, i2, it) + flux_at(flux2, i1, i2 + 1, it));
        const double south = 0.5 * (flux_at(flux2, i1, i2 - 1, it) + flux_at(flux2, i1, i2, it));
        const double div = (east - west) / dx + (north - south) / dx;
        out[g.index(i1, i2, it)] = params.de * lap_x + lap_t - params.pe * div;
      }
  return Field3(g, std::move(out));
}

Field3 fd_run(const Field3& f0, const Params& params, double t_end, const OracleConfig& cfg) {
  if (!(f0.grid() == cfg.grid)) {
    throw Error(ErrorKind::InvalidArgument, "oracle grid does not match the field");
  }
  cfg.validate(params);
  if (t_end <= 0.0) return f0;
  const auto steps = static_cast<std::int64_t>(std::ceil(t_end / cfg.dt_fine - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<double> v(f0.values().begin(), f0.values().end());
  for (std::int64_t s = 0; s < steps; ++s) {
    const Field3 r = fd_rhs(Field3(f0.grid(), v), params);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] += h * r[i];
      if (!std::isfinite(v[i])) {
        throw Error(ErrorKind::NumericalBlowup, "oracle run diverged", s + 1);
      }
    }
  }
  return Field3(f0.grid(), std::move(v));
}

Field3 exact_linear_solution(const Field3& f0, double de, double t) {
  const GridSpec& g = f0.grid();
  const auto mx = circulant(g.n_x(), [&](int k) { return std::exp(-de * k * k * t); });
  const auto mt = circulant(g.n_theta(), [&](int k) { return std::exp(-1.0 * k * k * t); });
  std::vector<double> v(f0.values().begin(), f0.values().end());
  apply_along(v, mx, 0, g.n_x(), g.n_x(), g.n_theta());
  apply_along(v, mx, 1, g.n_x(), g.n_x(), g.n_theta());
  apply_along(v, mt, 2, g.n_x(), g.n_x(), g.n_theta());
  return Field3(g, std::move(v));
}

double dense_poincare(std::span<const int> dims) {
  if (dims.empty() || dims.size() > 3) {
    throw Error(ErrorKind::InvalidArgument, "dense_poincare supports one to three axes");
  }
  std::size_t total = 1;
  for (int n : dims) {
    if (n < 2 || n % 2 != 0 || n > 8) {
      throw Error(ErrorKind::InvalidArgument, "dense_poincare needs even axes of at most 8 points");
    }
    total *= static_cast<std::size_t>(n);
  }

  // Kronecker sum of 1D negative second-derivative matrices.
  std::vector<double> a(total * total, 0.0);
  std::size_t inner = total;
  std::size_t outer = 1;
  for (int n : dims) {
    inner /= static_cast<std::size_t>(n);
    const auto d = circulant(n, [](int k) { return static_cast<double>(k) * k; });
    for (std::size_t o = 0; o < outer; ++o)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t row = (o * n + j) * inner + in;
            const std::size_t col = (o * n + l) * inner + in;
            a[row * total + col] += d[static_cast<std::size_t>(j) * n + l];
          }
    outer *= static_cast<std::size_t>(n);
  }

  // Gershgorin bound on the spectrum, used as the shift.
  double shift = 0.0;
  for (std::size_t r = 0; r < total; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < total; ++c) row += std::abs(a[r * total + c]);
    shift = std::max(shift, row);
  }

  auto project = [&](std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(total);
    double norm = 0.0;
    for (double& x : v) {
      x -= mean;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  };
  auto apply = [&](const std::vector<double>& v) {
    std::vector<double> out(total, 0.0);
    for (std::size_t r = 0; r < total; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < total; ++c) acc += a[r * total + c] * v[c];
      out[r] = acc;
    }
    return out;
  };

  // Deterministic start vector with components along every eigenvector.
  std::vector<double> v(total);
  for (std::size_t i = 0; i < total; ++i) v[i] = std::sin(1.0 + 0.7 * i) + 0.3 * std::cos(2.3 * i * i);
  project(v);

  double lambda = 0.0;
  for (int it = 0; it < kMaxPowerIterations; ++it) {
    const std::vector<double> av = apply(v);
    double rq = 0.0;
    for (std::size_t i = 0; i < total; ++i) rq += v[i] * av[i];
    for (std::size_t i = 0; i < total; ++i) v[i] = shift * v[i] - av[i];
    project(v);
    if (it > 0 && std::abs(rq - lambda) <= 1e-14 * std::abs(rq)) return 1.0 / std::sqrt(rq);
    lambda = rq;
  }
  throw Error(ErrorKind::IterationStall, "power iteration did not settle");
}

double dense_poincare(const GridSpec& grid) {
  const int dims[3] = {grid.n_x(), grid.n_x(), grid.n_theta()};
  return dense_poincare(dims);
}

}  // namespace activeflow::oracle
