#include "activeflow/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "activeflow/core_types.hpp"
#include "activeflow/diagnostics.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/equilibrium.hpp"
#include "activeflow/error.hpp"
#include "activeflow/oracle.hpp"

namespace activeflow {
namespace {

constexpr double kMean = 0.1;

struct Outcome {
  CheckStatus status;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome verdict(bool ok, std::string detail) {
  return {ok ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)};
}

// Smooth zero-mean perturbation touching x₁, x₂ and θ, identical on every grid.
Field3 smooth_data(const GridSpec& g, double mean, double amp) {
  std::vector<double> v(g.size());
  for (int i1 = 0; i1 < g.n_x(); ++i1)
    for (int i2 = 0; i2 < g.n_x(); ++i2)
      for (int it = 0; it < g.n_theta(); ++it) {
        const double x1 = g.x(i1), x2 = g.x(i2), th = g.theta(it);
        const double p = 0.5 * std::cos(x1) + 0.4 * std::sin(x2 + th) +
                         0.3 * std::cos(x1 - x2) * std::cos(th);
        v[g.index(i1, i2, it)] = mean * (1.0 + amp * p);
      }
  return Field3(g, std::move(v));
}

double linf_diff(const Field3& a, const Field3& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Values of a fine-grid field at the nodes of a coarser grid dividing it.
Field3 restrict_to(const Field3& fine, const GridSpec& coarse) {
  const int sx = fine.grid().n_x() / coarse.n_x();
  const int st = fine.grid().n_theta() / coarse.n_theta();
  std::vector<double> v(coarse.size());
  for (int i1 = 0; i1 < coarse.n_x(); ++i1)
    for (int i2 = 0; i2 < coarse.n_x(); ++i2)
      for (int it = 0; it < coarse.n_theta(); ++it)
        v[coarse.index(i1, i2, it)] = fine.at(i1 * sx, i2 * sx, it * st);
  return Field3(coarse, std::move(v));
}

Field3 final_state(const Field3& f0, const Params& p, double t_end) {
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 0;
  return *run(f0, p, t_end, o).final_field;
}

bool small_pe(double pe, double mean) {
  return std::abs(pe) < peclet_threshold(Params{pe, 1.0, 1.0, true}, mean, 1.0);
}

Outcome check_mass(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  const Params p{s.pe, 1.0, s.dt, true};
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.5, 2, 11}, g);
  const double m0 = mass(f0);
  double drift = 0.0;
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 0;
  o.on_record = [&](const DiagnosticsRecord& r) {
    drift = std::max(drift, std::abs(r.mass - m0) / m0);
  };
  const Trajectory traj = run(f0, p, 2000 * s.dt, o);
  const std::size_t steps = traj.diagnostics.size() - 1;
  return verdict(drift <= 1e-12 && steps == 2000,
                 fmt("max relative mass drift %.3e over %zu steps (limit 1e-12)", drift, steps));
}

Outcome check_analytic(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  const Params p{0.0, 2.0, s.dt, true};
  const Field3 f0 = make_initial(SingleModeData{kMean * kBoxVolume, 0.5, {1, 0, 0}}, g);
  const double m = mass(f0);
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 0;
  const Trajectory traj = run(f0, p, 1.0, o);
  const double t = traj.diagnostics.back().t;
  const double decay = std::exp(-2.0 * t);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    const double exact = m + (f0[i] - m) * decay;
    err = std::max(err, std::abs((*traj.final_field)[i] - exact));
    scale = std::max(scale, std::abs(f0[i] - m) * decay);
  }
  const double rel = err / scale;
  return verdict(rel <= 1e-8, fmt("relative Linf error %.3e against e^{-2t} at t=%g (limit 1e-8)",
                                  rel, t));
}

Outcome check_oracle(const AcceptanceSettings& s) {
  const Params p{s.pe, 1.0, s.dt, true};
  const double T = 0.1;
  auto fd = [&](int n) {
    const GridSpec g(n, n);
    oracle::OracleConfig cfg{g, 1e-4};
    return oracle::fd_run(smooth_data(g, kMean, 0.5), p, T, cfg);
  };

  // Spectral and finite-difference solutions on the same 8³ grid.
  const GridSpec g8(8, 8);
  const double diff = linf_diff(final_state(smooth_data(g8, kMean, 0.5), p, T), fd(8));

  // Finite-difference error against a resolved spectral solution, n = 4, 8, 16.
  const GridSpec gref(32, 32);
  const Field3 ref = final_state(smooth_data(gref, kMean, 0.5), p, T);
  double e[3];
  for (int i = 0; i < 3; ++i) {
    const int n = 4 << i;
    e[i] = linf_diff(fd(n), restrict_to(ref, GridSpec(n, n)));
  }
  const double ps1 = std::log2(e[0] / e[1]), ps2 = std::log2(e[1] / e[2]);
  // Least-squares slope of log e against log h over the three grids.
  const double ps = (std::log2(e[0]) - std::log2(e[2])) / 2.0;

  // Time order of the spectral stepper at 16³.
  const GridSpec g16(16, 16);
  const Field3 f16 = smooth_data(g16, kMean, 0.5);
  const double Tt = 0.5;
  const auto steps = static_cast<double>(step_count(Tt, s.dt));
  std::string time_detail;
  bool time_ok = false;
  if (steps < 2.0) {
    time_detail = fmt("dt=%g leaves fewer than two steps on [0, %g]", s.dt, Tt);
  } else {
    const double h = Tt / steps;
    auto at_step = [&](double dt) {
      Params q = p;
      q.dt = dt;
      return final_state(f16, q, Tt);
    };
    const Field3 fine = at_step(h / 64.0);
    double et[3];
    for (int i = 0; i < 3; ++i) et[i] = linf_diff(at_step(h / (1 << i)), fine);
    const double pt1 = std::log2(et[0] / et[1]), pt2 = std::log2(et[1] / et[2]);
    time_ok = pt1 >= 1.9 && pt2 >= 1.9;
    time_detail = fmt("time order %.2f, %.2f (limit 1.9)", pt1, pt2);
  }

  const bool ok = diff <= 1e-3 && ps >= 1.8 && time_ok;
  return verdict(ok, fmt("8^3 Linf diff %.2e (limit 1e-3); space order %.2f (steps %.2f, %.2f; "
                         "limit 1.8); ",
                         diff, ps, ps1, ps2) +
                         time_detail);
}

Outcome check_decay(const AcceptanceSettings& s) {
  const double cp = oracle::dense_poincare(GridSpec(8, 8));
  const double k_ref = kappa(Params{0.01, 1.0, 1.0, true}, 0.0, 1.0);
  if (std::abs(k_ref - 0.248026) > 5e-7) {
    return verdict(false, fmt("kappa(Pe=0.01, m=0) = %.7f, expected 0.248026", k_ref));
  }
  const GridSpec g(s.n, s.n);
  const Field3 f0 = smooth_data(g, kMean, 0.5);
  const Params p{s.pe, 1.0, s.dt, true};
  const EquilibriumReport rep = verify_small_pe_decay(f0, p, 10.0, 1e-3, cp);
  if (!rep.is_small_pe) {
    return {CheckStatus::Skip, fmt("Pe=%g is not below the threshold %.4f", s.pe, rep.threshold)};
  }
  return verdict(rep.pointwise_bound_ok && rep.measured_rate >= rep.kappa,
                 fmt("C_P=%.12f kappa=%.6f threshold=%.4f fitted rate %.6f, pointwise bound %s",
                     cp, rep.kappa, rep.threshold, rep.measured_rate,
                     rep.pointwise_bound_ok ? "held" : "violated"));
}

Outcome check_spatial_average(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  std::vector<double> v(g.size());
  for (int i1 = 0; i1 < g.n_x(); ++i1)
    for (int i2 = 0; i2 < g.n_x(); ++i2)
      for (int it = 0; it < g.n_theta(); ++it) {
        const double th = g.theta(it);
        v[g.index(i1, i2, it)] =
            kMean * (1.0 + 0.4 * std::cos(th) + 0.3 * std::cos(g.x(i1)) * std::sin(th));
      }
  const Field3 f0(g, std::move(v));
  std::vector<double> pes{0.0};
  if (s.pe != 0.0) pes = {0.0, 0.05, 0.3};

  const double T = 5.0;
  const auto steps = step_count(T, s.dt);
  bool ok = true;
  std::string detail;
  for (double pe : pes) {
    RunOptions o;
    o.snapshot_stride = static_cast<std::size_t>(std::max<std::int64_t>(1, steps / 50));
    o.k_max = 0;
    const SpatialAverageReport rep = spatial_average_decay(run(f0, Params{pe, 1.0, s.dt, true}, T, o));
    const double rate = rep.measured_rate.value_or(0.0);
    ok = ok && rep.bound_ok && rep.measured_rate && rate >= 1.0 - 1e-3;
    detail += fmt("Pe=%g rate %.6f bound %s; ", pe, rate, rep.bound_ok ? "held" : "violated");
  }
  detail += "(limit rate >= 0.999)";
  return verdict(ok, detail);
}

Outcome check_rho_bounds(const AcceptanceSettings& s) {
  if (std::abs(s.pe) > 0.1) return {CheckStatus::Skip, fmt("applies to Pe <= 0.1, got %g", s.pe)};
  const GridSpec g(s.n, s.n);
  const Field3 f0 = make_initial(RandomBandlimitedData{0.12 * kBoxVolume, 0.3, 3, 7}, g);
  double lo = 1.0, hi = 0.0;
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 0;
  o.on_record = [&](const DiagnosticsRecord& r) {
    lo = std::min(lo, r.rho_min);
    hi = std::max(hi, r.rho_max);
  };
  run(f0, Params{s.pe, 1.0, s.dt, true}, 5.0, o);
  return verdict(lo >= -1e-6 && hi <= 1.0 + 1e-6,
                 fmt("rho in [%.6f, %.6f] over t <= 5 (limits -1e-6, 1+1e-6)", lo, hi));
}

Outcome check_lp_ladder(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  const Field3 f0 = make_initial(RandomBandlimitedData{0.08 * kBoxVolume, 0.8, 4, 3}, g);
  double sup0 = 0.0;
  for (double x : f0.values()) sup0 = std::max(sup0, std::abs(x));
  double sup64 = 0.0;
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 6;
  o.on_record = [&](const DiagnosticsRecord& r) { sup64 = std::max(sup64, r.lp_ladder[6]); };
  run(f0, Params{s.pe, 1.0, s.dt, true}, 10.0, o);
  return verdict(sup64 <= 2.0 * sup0,
                 fmt("sup_t ||f||_64 = %.6f, 2||f0||_inf = %.6f", sup64, 2.0 * sup0));
}

Outcome check_smoothing(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  const int k = s.n / 2;
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.3, k, 5}, g);
  const Field3 f1 = final_state(f0, Params{s.pe, 1.0, s.dt, true}, 1.0);
  const double t0 = spectral_tail(f0, 0.25), t1 = spectral_tail(f1, 0.25);
  return verdict(t0 > 0.0 && t1 <= 0.01 * t0,
                 fmt("spectral tail %.3e at t=0, %.3e at t=1 (limit ratio 0.01)", t0, t1));
}

Outcome check_de_giorgi(const AcceptanceSettings& s) {
  if (!small_pe(s.pe, kMean)) return {CheckStatus::Skip, fmt("Pe=%g is not small", s.pe)};
  const GridSpec g(s.n, s.n);
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.5, 2, 13}, g);
  RunOptions o;
  o.snapshot_stride = 1;
  o.k_max = 0;
  const Trajectory traj = run(f0, Params{s.pe, 1.0, s.dt, true}, 2.0, o);
  const double r = 0.5, delta = 0.01;
  RescaleCenter center;
  center.t0 = traj.times.back();
  const RescaledTrajectory scaled = rescale_trajectory(traj, center, r, delta, 0.0);
  const TruncationLadder lad = truncation_energy(scaled.trajectory, scaled.window, 6);
  const auto& e = lad.energies;
  bool monotone = true;
  for (std::size_t i = 1; i < e.size(); ++i) monotone = monotone && e[i] <= e[i - 1];
  return verdict(e[0] > 0.0 && monotone && e[6] <= 0.1 * e[0],
                 fmt("ell=%.3e, E_0=%.3e, E_6=%.3e, %s", scaled.ell, e[0], e[6],
                     monotone ? "nonincreasing" : "not monotone"));
}

Outcome check_stationary(const AcceptanceSettings& s) {
  const GridSpec g(s.n, s.n);
  const Params p{s.pe, 1.0, s.dt, true};
  const double res = stationary_residual(make_initial(ConstantData{kMean * kBoxVolume}, g), p);
  const StationaryResult sol = solve_stationary(smooth_data(g, kMean, 0.3), p, 1e-9, 100.0);
  return verdict(res <= 1e-13 && sol.distance_to_mean <= 1e-6,
                 fmt("constant residual %.2e (limit 1e-13); solve reached %.2e from the mean "
                     "at t=%g (limit 1e-6)",
                     res, sol.distance_to_mean, sol.time));
}

struct Criterion {
  int id;
  const char* name;
  bool needs_pe;
  Outcome (*fn)(const AcceptanceSettings&);
};

constexpr Criterion kCriteria[] = {
    {1, "mass conservation", true, check_mass},
    {2, "Pe=0 analytic decay", false, check_analytic},
    {3, "finite-difference oracle and convergence order", true, check_oracle},
    {4, "small-Pe exponential decay bound", true, check_decay},
    {5, "spatial average heat equation", false, check_spatial_average},
    {6, "density bounds", true, check_rho_bounds},
    {7, "L^64 envelope", true, check_lp_ladder},
    {8, "smoothing of high modes", true, check_smoothing},
    {9, "De Giorgi truncation ladder", true, check_de_giorgi},
    {10, "stationary constants", false, check_stationary},
};

}  // namespace

std::string_view to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "SKIP";
  }
  return "?";
}

std::vector<CheckResult> run_acceptance(const AcceptanceSettings& settings,
                                        const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> results;
  for (const Criterion& c : kCriteria) {
    const auto& want = settings.checks;
    if (!want.empty() && std::find(want.begin(), want.end(), c.id) == want.end()) continue;

    CheckResult r;
    r.id = c.id;
    r.name = c.name;
    const auto start = std::chrono::steady_clock::now();
    if (c.needs_pe && settings.pe == 0.0) {
      r.status = CheckStatus::Skip;
      r.detail = "needs Pe != 0";
    } else {
      try {
        Outcome o = c.fn(settings);
        r.status = o.status;
        r.detail = std::move(o.detail);
      } catch (const Error& e) {
        r.status = CheckStatus::Fail;
        r.detail = std::string(to_string(e.kind())) + ": " + e.what();
      } catch (const std::exception& e) {
        r.status = CheckStatus::Fail;
        r.detail = e.what();
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace activeflow
