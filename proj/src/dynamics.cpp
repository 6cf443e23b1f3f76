#include "activeflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "activeflow/diagnostics.hpp"
#include "activeflow/error.hpp"

namespace activeflow {
namespace {

constexpr double kBlowupGrowth = 10.0;

double deriv_k(int i, int n) noexcept {
  return i == n / 2 ? 0.0 : static_cast<double>(wavenumber(i, n));
}

// Symbol of Dₑ·Δ + ∂θ² at half-spectrum index (i1, i2, j).
double linear_symbol(int i1, int i2, int j, int n, double de) noexcept {
  const double k1 = wavenumber(i1, n), k2 = wavenumber(i2, n);
  return -(de * (k1 * k1 + k2 * k2) + static_cast<double>(j) * j);
}

Spectrum advection_from_values(const GridSpec& g, std::span<const double> f, const Params& p) {
  Spectrum out(g);
  if (p.pe == 0.0) return out;

  const int nt = g.n_theta();
  std::vector<double> cs(nt), sn(nt);
  for (int it = 0; it < nt; ++it) {
    auto [c, s] = e_vec(g.theta(it));
    cs[it] = c;
    sn[it] = s;
  }
  std::vector<double> q1(g.size()), q2(g.size());
  for (std::size_t cell = 0; cell < g.plane_size(); ++cell) {
    const double* fc = f.data() + cell * nt;
    double rho = 0.0;
    for (int it = 0; it < nt; ++it) rho += fc[it];
    rho *= g.dtheta();
    const double mobility = 1.0 - rho;
    for (int it = 0; it < nt; ++it) {
      const double q = mobility * fc[it];
      q1[cell * nt + it] = q * cs[it];
      q2[cell * nt + it] = q * sn[it];
    }
  }
  Spectrum s1 = forward(g, q1);
  Spectrum s2 = forward(g, q2);
  if (p.dealias) {
    dealias_in_place(s1);
    dealias_in_place(s2);
  }
  const int n = g.n_x();
  for (int i1 = 0; i1 < n; ++i1) {
    const double k1 = deriv_k(i1, n);
    for (int i2 = 0; i2 < n; ++i2) {
      const double k2 = deriv_k(i2, n);
      for (int j = 0; j < out.n_half(); ++j) {
        const std::size_t idx = out.index(i1, i2, j);
        out[idx] = -p.pe * Complex(0.0, 1.0) * (k1 * s1[idx] + k2 * s2[idx]);
      }
    }
  }
  return out;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Spectrum advection_spectrum(const Field3& f, const Params& params) {
  return advection_from_values(f.grid(), f.values(), params);
}

Field3 rhs(const Field3& f, const Params& params) {
  const GridSpec& g = f.grid();
  Spectrum s = forward(f);
  const Spectrum adv = advection_spectrum(f, params);
  const int n = g.n_x();
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j < s.n_half(); ++j) {
        const std::size_t idx = s.index(i1, i2, j);
        s[idx] = linear_symbol(i1, i2, j, n, params.de) * s[idx] + adv[idx];
      }
  return inverse(s);
}

Field3 step_imex(const Field3& f, const Params& params) {
  params.validate();
  const GridSpec& g = f.grid();
  const double dt = params.dt;
  const int n = g.n_x();

  Spectrum s = forward(f);
  const Spectrum n1 = advection_spectrum(f, params);

  // Integrating-factor midpoint:
  //   f̂_{1/2} = E(dt/2)·(f̂ + dt/2·N̂(f))
  //   f̂'      = E(dt)·f̂ + dt·E(dt/2)·N̂(f_{1/2})
  std::vector<double> half_decay(s.coeffs().size());
  Spectrum mid(g);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j < s.n_half(); ++j) {
        const std::size_t idx = s.index(i1, i2, j);
        half_decay[idx] = std::exp(0.5 * dt * linear_symbol(i1, i2, j, n, params.de));
        mid[idx] = half_decay[idx] * (s[idx] + 0.5 * dt * n1[idx]);
      }

  const std::vector<double> mid_values = inverse_values(mid);
  const Spectrum n2 = advection_from_values(g, mid_values, params);
  for (std::size_t idx = 0; idx < s.coeffs().size(); ++idx) {
    const double h = half_decay[idx];
    s[idx] = h * h * s[idx] + dt * h * n2[idx];
  }

  std::vector<double> next = inverse_values(s);
  for (double v : next) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalBlowup, "non-finite value after step");
  }
  const double before = sup_norm(f.values());
  const double after = sup_norm(next);
  if (after > kBlowupGrowth * before && after > 0.0) {
    throw Error(ErrorKind::NumericalBlowup,
                "sup norm grew from " + std::to_string(before) + " to " + std::to_string(after) +
                    " in one step");
  }
  return Field3(g, std::move(next));
}

double cfl_dt(const Field3& f, const Params& params) {
  const Field2 rho = compute_rho(f);
  double worst = 0.0;
  for (double r : rho.values()) worst = std::max(worst, std::abs(1.0 - r));
  return 0.25 * f.grid().dx() / std::max(std::abs(params.pe) * worst, 1e-12);
}

std::int64_t step_count(double t_end, double dt) {
  if (t_end <= 0.0) return 0;
  // Absorb round-off so that e.g. t_end = 1, dt = 0.01 gives exactly 100.
  return static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
}

Trajectory run(const Field3& f0, const Params& params, double t_end,
               std::size_t snapshot_stride) {
  RunOptions options;
  options.snapshot_stride = snapshot_stride;
  return run(f0, params, t_end, options);
}

Trajectory run(const Field3& f0, const Params& params, double t_end, const RunOptions& options) {
  params.validate();
  if (!std::isfinite(t_end)) throw Error(ErrorKind::InvalidArgument, "t_end must be finite");
  if (options.snapshot_stride == 0) {
    throw Error(ErrorKind::InvalidArgument, "snapshot stride must be positive");
  }
  if (!check_admissible(f0).ok) {
    throw Error(ErrorKind::AdmissibilityViolation, "run requires admissible initial data");
  }

  Trajectory traj(f0.grid());
  traj.params = params;
  traj.reference_mean = options.reference_mean >= 0.0 ? options.reference_mean : mass(f0);
  const RecordOptions rec_opts{options.k_max, options.tail_fraction};
  const auto stride = static_cast<std::int64_t>(options.snapshot_stride);

  auto record = [&](std::int64_t step, const Field3& f) {
    const double t = static_cast<double>(step) * params.dt;
    traj.diagnostics.push_back(compute_record(f, t, traj.reference_mean, rec_opts));
    if (options.on_record) options.on_record(traj.diagnostics.back());
    if (step % stride == 0) {
      traj.times.push_back(t);
      traj.snapshot_steps.push_back(step);
      if (options.keep_snapshots) traj.snapshots.push_back(f);
      if (options.on_snapshot) options.on_snapshot(step, t, f);
    }
  };

  const std::int64_t first = options.start_step;
  const std::int64_t last = step_count(t_end, params.dt);
  Field3 f = f0;
  record(first, f);
  for (std::int64_t step = first + 1; step <= last; ++step) {
    if (params.dt > cfl_dt(f, params)) ++traj.cfl_warnings;
    try {
      f = step_imex(f, params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NumericalBlowup) throw;
      throw Error(ErrorKind::NumericalBlowup,
                  std::string(e.what()) + " (step " + std::to_string(step) + ")", step);
    }
    record(step, f);
    if (options.on_step) options.on_step(step, static_cast<double>(step) * params.dt, f);
  }
  traj.final_field = std::move(f);
  return traj;
}

RescaleMap rescale_problem(const Params& params) {
  if (params.pe == 0.0) throw Error(ErrorKind::ZeroPeclet, "rescaling requires Pe != 0");
  if (params.de <= 0.0) throw Error(ErrorKind::InvalidArgument, "de must be positive");
  // Negative Pe flips the orientation of x; the dilation factors use |Pe|.
  const double pe = std::abs(params.pe);
  return {params.de / (pe * pe), params.de / pe, std::sqrt(params.de) / pe};
}

double rescale_factor(double r, double delta, double norm_sum) {
  if (norm_sum <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "rescaling needs a positive norm sum");
  }
  return std::sqrt(delta) * std::pow(r, 1.5) / norm_sum;
}

RescaledField rescale_field(const Field3& f, const RescaleCenter& center, double r, double delta,
                            double v_norm, double p_norm, int points_per_axis) {
  if (!(r > 0.0 && r < std::min(1.0, std::sqrt(center.t0 / 2.0)))) {
    throw Error(ErrorKind::RadiusTooLarge,
                "radius must satisfy 0 < r < min{1, sqrt(t0/2)} (r=" + std::to_string(r) +
                    ", t0=" + std::to_string(center.t0) + ")");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  }
  if (points_per_axis < 1) throw Error(ErrorKind::InvalidArgument, "need at least one point");

  RescaledField out;
  out.ell = rescale_factor(r, delta, p_norm + v_norm);
  out.points_per_axis = points_per_axis;
  const int m = points_per_axis;

  const GridSpec& g = f.grid();
  const Spectrum s = forward(f);
  const int n = g.n_x(), nt = g.n_theta();

  // Per-axis tables w(k)·exp(i·k·y_p) for k ∈ [−n/2, n/2]; the Nyquist
  // coefficient is split evenly between ±n/2 so the interpolant is real.
  auto table = [&](int len, double origin) {
    std::vector<Complex> t(static_cast<std::size_t>(m) * (len + 1));
    for (int p = 0; p < m; ++p) {
      const double zeta = -1.0 + (2.0 * p + 1.0) / m;
      const double y = origin + r * zeta;
      for (int k = -len / 2; k <= len / 2; ++k) {
        const double w = (std::abs(k) == len / 2) ? 0.5 : 1.0;
        t[static_cast<std::size_t>(p) * (len + 1) + (k + len / 2)] = std::polar(w, k * y);
      }
    }
    return t;
  };
  const auto t1 = table(n, center.xi0[0]);
  const auto t2 = table(n, center.xi0[1]);
  const auto t3 = table(nt, center.xi0[2]);

  const int w1 = n + 1, w3 = nt + 1;
  // Stage 1: contract the angle direction.
  std::vector<Complex> a(static_cast<std::size_t>(w1) * w1 * m);
  for (int k1 = -n / 2; k1 <= n / 2; ++k1)
    for (int k2 = -n / 2; k2 <= n / 2; ++k2)
      for (int p3 = 0; p3 < m; ++p3) {
        Complex acc = 0.0;
        for (int k3 = -nt / 2; k3 <= nt / 2; ++k3) {
          acc += t3[static_cast<std::size_t>(p3) * w3 + (k3 + nt / 2)] * s.mode(k1, k2, k3);
        }
        a[(static_cast<std::size_t>(k1 + n / 2) * w1 + (k2 + n / 2)) * m + p3] = acc;
      }
  // Stage 2: contract x₂.
  std::vector<Complex> b(static_cast<std::size_t>(w1) * m * m);
  for (int k1 = 0; k1 < w1; ++k1)
    for (int p2 = 0; p2 < m; ++p2)
      for (int p3 = 0; p3 < m; ++p3) {
        Complex acc = 0.0;
        for (int k2 = 0; k2 < w1; ++k2) {
          acc += t2[static_cast<std::size_t>(p2) * w1 + k2] *
                 a[(static_cast<std::size_t>(k1) * w1 + k2) * m + p3];
        }
        b[(static_cast<std::size_t>(k1) * m + p2) * m + p3] = acc;
      }
  // Stage 3: contract x₁.
  out.values.resize(static_cast<std::size_t>(m) * m * m);
  for (int p1 = 0; p1 < m; ++p1)
    for (int p2 = 0; p2 < m; ++p2)
      for (int p3 = 0; p3 < m; ++p3) {
        Complex acc = 0.0;
        for (int k1 = 0; k1 < w1; ++k1) {
          acc += t1[static_cast<std::size_t>(p1) * w1 + k1] *
                 b[(static_cast<std::size_t>(k1) * m + p2) * m + p3];
        }
        out.values[(static_cast<std::size_t>(p1) * m + p2) * m + p3] = out.ell * acc.real();
      }
  return out;
}

}  // namespace activeflow
