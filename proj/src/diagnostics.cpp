#include "activeflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "activeflow/error.hpp"
#include "activeflow/spectral.hpp"

namespace activeflow {
namespace {

constexpr double kNegativeTolerance = 1e-10;

double cell_volume(const GridSpec& g) { return kBoxVolume / static_cast<double>(g.size()); }

// Trapezoidal ∫ y dt over consecutive samples.
double trapezoid(std::span<const double> t, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

// Trapezoid rule that is exact when y is exponential on each interval.
double exp_trapezoid(std::span<const double> t, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double h = t[i] - t[i - 1];
    const double y0 = y[i - 1], y1 = y[i];
    if (!(y0 > 0.0 && y1 > 0.0)) {
      acc += 0.5 * h * (y0 + y1);
      continue;
    }
    const double u = y1 / y0 - 1.0;
    // (r−1)/ln r, with its series near r = 1.
    const double w = std::abs(u) < 1e-5 ? 1.0 + u / 2.0 - u * u / 12.0 : u / std::log1p(u);
    acc += h * y0 * w;
  }
  return acc;
}

struct GradientField {
  std::vector<double> d1, d2, dt;
};

GradientField physical_gradient(const Field3& f) {
  auto values = [](const Field3& d) { return std::vector<double>(d.values().begin(), d.values().end()); };
  return {values(deriv(f, Axis::X1)), values(deriv(f, Axis::X2)), values(deriv(f, Axis::Theta))};
}

}  // namespace

double mass(const Field3& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v;
  return acc / static_cast<double>(f.size());
}

double total_mass(const Field3& f) { return mass(f) * kBoxVolume; }

double l2_norm(const Field3& f) { return l2_distance_to_constant(f, 0.0); }

double l2_distance_to_constant(const Field3& f, double c) {
  double acc = 0.0;
  for (double v : f.values()) acc += (v - c) * (v - c);
  return std::sqrt(acc * cell_volume(f.grid()));
}

DiagnosticsRecord compute_record(const Field3& f, double t, double reference_mean,
                                 const RecordOptions& options) {
  DiagnosticsRecord r;
  r.t = t;
  r.mass = mass(f);
  r.l2_to_const = l2_distance_to_constant(f, reference_mean);
  for (double v : f.values()) r.linf = std::max(r.linf, std::abs(v));
  const Field2 rho = compute_rho(f);
  auto [lo, hi] = std::minmax_element(rho.values().begin(), rho.values().end());
  r.rho_min = *lo;
  r.rho_max = *hi;
  const Spectrum s = forward(f);
  r.grad_l2 = std::sqrt(grad_norm_sq(s));
  r.spectral_tail = spectral_tail(f, options.tail_fraction);
  r.lp_ladder = lp_ladder(f, options.k_max);
  return r;
}

double parabolic_norm(const Trajectory& traj) {
  const auto& recs = traj.diagnostics;
  if (recs.empty()) throw Error(ErrorKind::InvalidArgument, "parabolic norm of an empty trajectory");
  const double c = traj.reference_mean;
  double sup_sq = 0.0;
  std::vector<double> t, g2;
  t.reserve(recs.size());
  g2.reserve(recs.size());
  for (const auto& r : recs) {
    // ∫f² = ‖f − c‖² + |Υ|·(2c⟨f⟩ − c²).
    const double l2_sq = r.l2_to_const * r.l2_to_const + kBoxVolume * (2.0 * c * r.mass - c * c);
    sup_sq = std::max(sup_sq, l2_sq);
    t.push_back(r.t);
    g2.push_back(r.grad_l2 * r.grad_l2);
  }
  return std::sqrt(sup_sq + exp_trapezoid(t, g2));
}

double truncation_level(int k) noexcept { return 0.5 * (1.0 - std::ldexp(1.0, -k)); }

double truncation_time(int k) noexcept { return -0.5 * (1.0 + std::ldexp(1.0, -k)); }

TruncationLadder truncation_energy(const Trajectory& traj, std::pair<double, double> window,
                                   int k_max) {
  auto [ta, tb] = window;
  if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "k_max must be non-negative");
  if (!(tb > ta)) throw Error(ErrorKind::InvalidArgument, "empty truncation window");
  if (traj.times.empty() || ta < traj.times.front() - 1e-12 || tb > traj.times.back() + 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "truncation window outside the trajectory span");
  }
  if (traj.snapshots.size() != traj.times.size()) {
    throw Error(ErrorKind::WindowTooShort, "trajectory was run without stored snapshots");
  }

  std::vector<std::size_t> in_window;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] >= ta - 1e-12 && traj.times[i] <= tb + 1e-12) in_window.push_back(i);
  }
  if (in_window.size() < static_cast<std::size_t>(k_max) + 1) {
    throw Error(ErrorKind::WindowTooShort,
                "window holds " + std::to_string(in_window.size()) + " snapshots, need " +
                    std::to_string(k_max + 1));
  }

  TruncationLadder ladder;
  ladder.k_max = k_max;
  for (int k = 0; k <= k_max; ++k) {
    ladder.levels.push_back(truncation_level(k));
    // [−1, 0] ↦ [ta, tb]
    ladder.window_starts.push_back(ta + (truncation_time(k) + 1.0) * (tb - ta));
  }

  // Per snapshot and level: ∫(f − Cₖ)₊² and ∫ 1_{f>Cₖ}|∇_ξ f|².
  const std::size_t levels = static_cast<std::size_t>(k_max) + 1;
  std::vector<std::vector<double>> mass_term(levels), grad_term(levels);
  for (std::size_t i : in_window) {
    const Field3& f = traj.snapshots[i];
    const GradientField grad = physical_gradient(f);
    const double dv = cell_volume(f.grid());
    for (std::size_t k = 0; k < levels; ++k) {
      const double level = ladder.levels[k];
      double m = 0.0, gsum = 0.0;
      for (std::size_t p = 0; p < f.size(); ++p) {
        const double excess = f[p] - level;
        if (excess > 0.0) {
          m += excess * excess;
          gsum += grad.d1[p] * grad.d1[p] + grad.d2[p] * grad.d2[p] + grad.dt[p] * grad.dt[p];
        }
      }
      mass_term[k].push_back(m * dv);
      grad_term[k].push_back(gsum * dv);
    }
  }

  for (std::size_t k = 0; k < levels; ++k) {
    const double start = ladder.window_starts[k];
    double sup = 0.0;
    std::vector<double> t, g;
    for (std::size_t w = 0; w < in_window.size(); ++w) {
      const double tw = traj.times[in_window[w]];
      if (tw < start - 1e-12) continue;
      sup = std::max(sup, mass_term[k][w]);
      t.push_back(tw);
      g.push_back(grad_term[k][w]);
    }
    ladder.energies.push_back(sup + trapezoid(t, g));
  }
  return ladder;
}

std::vector<double> lp_ladder(const Field3& f, int k_max) {
  if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "k_max must be non-negative");
  std::vector<double> v(f.values().begin(), f.values().end());
  double peak = 0.0;
  for (double& x : v) {
    if (x < -kNegativeTolerance) {
      throw Error(ErrorKind::NegativeField, "Lp ladder needs a non-negative field");
    }
    x = std::max(x, 0.0);
    peak = std::max(peak, x);
  }
  std::vector<double> ladder(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (peak == 0.0) return ladder;

  // ‖f‖_p = peak·(∫(f/peak)^p)^{1/p}; powers 2^k by repeated squaring.
  const double dv = cell_volume(f.grid());
  for (double& x : v) x /= peak;
  for (int k = 0; k <= k_max; ++k) {
    double acc = 0.0;
    for (double x : v) acc += x;
    const double p = std::ldexp(1.0, k);
    ladder[static_cast<std::size_t>(k)] = peak * std::pow(acc * dv, 1.0 / p);
    for (double& x : v) x *= x;
  }
  return ladder;
}

double spectral_tail(const Field3& f, double fraction) {
  const Spectrum s = forward(f);
  const GridSpec& g = f.grid();
  const int n = g.n_x(), nt = g.n_theta();
  const double cut_x = fraction * n, cut_t = fraction * nt;
  double tail = 0.0, total = 0.0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j < s.n_half(); ++j) {
        if (i1 == 0 && i2 == 0 && j == 0) continue;
        const double w = (j == 0 || j == nt / 2) ? 1.0 : 2.0;
        const double e = w * std::norm(s[s.index(i1, i2, j)]);
        total += e;
        if (std::abs(wavenumber(i1, n)) > cut_x || std::abs(wavenumber(i2, n)) > cut_x || j > cut_t) {
          tail += e;
        }
      }
  // A constant field carries only round-off away from the mean mode.
  const double mean_energy = std::norm(s[0]);
  if (total <= 1e-28 * mean_energy || total == 0.0) return 0.0;
  return tail / total;
}

MomentResidual moment_residual(const Trajectory& traj) {
  if (traj.snapshots.size() < 3 || traj.snapshots.size() != traj.times.size()) {
    throw Error(ErrorKind::TooFewSnapshots, "moment residual needs three or more snapshots");
  }
  const GridSpec& g = traj.grid;
  const Params& p = traj.params;
  const double da = g.dx() * g.dx();

  std::vector<Field2> rho;
  rho.reserve(traj.snapshots.size());
  for (const auto& f : traj.snapshots) rho.push_back(compute_rho(f));

  MomentResidual out;
  for (std::size_t i = 1; i + 1 < traj.snapshots.size(); ++i) {
    const double span = traj.times[i + 1] - traj.times[i - 1];
    auto [p1, p2] = compute_p(traj.snapshots[i]);
    std::vector<double> q1(g.plane_size()), q2(g.plane_size());
    for (std::size_t c = 0; c < q1.size(); ++c) {
      q1[c] = (1.0 - rho[i][c]) * p1[c];
      q2[c] = (1.0 - rho[i][c]) * p2[c];
    }
    Spectrum2 s1 = forward(Field2(g, std::move(q1)));
    Spectrum2 s2 = forward(Field2(g, std::move(q2)));
    if (p.dealias) {
      const int n = g.n_x(), keep = n / 3;
      for (int i1 = 0; i1 < n; ++i1)
        for (int j = 0; j < s1.n_half(); ++j) {
          if (std::abs(wavenumber(i1, n)) > keep || j > keep) {
            s1[s1.index(i1, j)] = 0.0;
            s2[s2.index(i1, j)] = 0.0;
          }
        }
    }
    const Field2 div = [&] {
      const int n = g.n_x();
      Spectrum2 d(g);
      for (int i1 = 0; i1 < n; ++i1) {
        const double k1 = i1 == n / 2 ? 0.0 : wavenumber(i1, n);
        for (int j = 0; j < d.n_half(); ++j) {
          const double k2 = j == n / 2 ? 0.0 : j;
          const std::size_t idx = d.index(i1, j);
          d[idx] = Complex(0.0, 1.0) * (k1 * s1[idx] + k2 * s2[idx]);
        }
      }
      return inverse(d);
    }();
    const Field2 lap = laplacian(rho[i]);

    double acc = 0.0;
    for (std::size_t c = 0; c < g.plane_size(); ++c) {
      const double dt_rho = (rho[i + 1][c] - rho[i - 1][c]) / span;
      const double r = dt_rho + p.pe * div[c] - p.de * lap[c];
      acc += r * r;
    }
    out.times.push_back(traj.times[i]);
    out.residuals.push_back(std::sqrt(acc * da));
  }
  return out;
}

double fit_decay_rate(std::span<const double> t, std::span<const double> values,
                      std::pair<double, double> window) {
  if (t.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "time and value series differ in length");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.first || t[i] > window.second) continue;
    if (!(values[i] > 0.0)) {
      throw Error(ErrorKind::NonpositiveValue,
                  "decay fit needs positive values (t=" + std::to_string(t[i]) + ")");
    }
    xs.push_back(t[i]);
    ys.push_back(-std::log(values[i]));
  }
  if (xs.size() < 10) {
    throw Error(ErrorKind::TooFewPoints,
                "decay fit needs 10 points in the window, got " + std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorKind::TooFewPoints, "decay fit needs distinct times");
  return sxy / sxx;
}

RescaledTrajectory rescale_trajectory(const Trajectory& traj, const RescaleCenter& center,
                                      double r, double delta, double v_norm) {
  if (!(r > 0.0 && r < std::min(1.0, std::sqrt(center.t0 / 2.0)))) {
    throw Error(ErrorKind::RadiusTooLarge, "radius must satisfy 0 < r < min{1, sqrt(t0/2)}");
  }
  const double pnorm = parabolic_norm(traj);
  const double ell = rescale_factor(r, delta, pnorm + v_norm);

  Trajectory scaled(traj.grid);
  scaled.params = traj.params;
  scaled.reference_mean = ell * traj.reference_mean;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::vector<double> v(traj.snapshots[i].values().begin(), traj.snapshots[i].values().end());
    for (double& x : v) x *= ell;
    scaled.snapshots.emplace_back(traj.grid, std::move(v));
    scaled.times.push_back(traj.times[i]);
    scaled.snapshot_steps.push_back(traj.snapshot_steps[i]);
  }
  for (DiagnosticsRecord rec : traj.diagnostics) {
    rec.mass *= ell;
    rec.l2_to_const *= ell;
    rec.linf *= ell;
    rec.rho_min *= ell;
    rec.rho_max *= ell;
    rec.grad_l2 *= ell;
    for (double& x : rec.lp_ladder) x *= ell;
    scaled.diagnostics.push_back(std::move(rec));
  }
  return {ell, pnorm, {center.t0 - r * r, center.t0}, std::move(scaled)};
}

}  // namespace activeflow
