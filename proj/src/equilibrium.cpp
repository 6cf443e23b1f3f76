#include "activeflow/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "activeflow/diagnostics.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/error.hpp"
#include "activeflow/spectral.hpp"

namespace activeflow {
namespace {

constexpr std::int64_t kResidualCheckEvery = 10;

// Absolute floor below which a deviation counts as exactly zero.
constexpr double kDegenerateDeviation = 1e-14;

std::vector<double> angular_profile(const Field3& f) {
  const GridSpec& g = f.grid();
  const int nt = g.n_theta();
  std::vector<double> h(nt, 0.0);
  for (std::size_t cell = 0; cell < g.plane_size(); ++cell)
    for (int it = 0; it < nt; ++it) h[it] += f[cell * nt + it];
  for (double& v : h) v *= g.dx() * g.dx();
  return h;
}

}  // namespace

double kappa(const Params& params, double mean, double c_p) {
  if (!(c_p > 0.0) || !(params.de > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "kappa needs c_p > 0 and de > 0");
  }
  const double dmin = std::min(params.de, 1.0);
  const double drift = kTwoPi * kTwoPi * params.pe * params.pe * (1.0 + mean) * (1.0 + mean);
  return 0.5 * (0.5 * dmin / (c_p * c_p) - drift / dmin);
}

double peclet_threshold(const Params& params, double mean, double c_p) {
  if (!(c_p > 0.0) || !(params.de > 0.0) || mean < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "threshold needs c_p > 0, de > 0, mean >= 0");
  }
  return std::min(params.de, 1.0) /
         (2.0 * std::numbers::sqrt2 * std::numbers::pi * c_p * (1.0 + mean));
}

EquilibriumReport verify_small_pe_decay(const Field3& f0, const Params& params, double t_end,
                                        double tol, std::optional<double> c_p) {
  if (!check_admissible(f0).ok) {
    throw Error(ErrorKind::AdmissibilityViolation, "decay check needs admissible data");
  }
  EquilibriumReport rep;
  rep.poincare = c_p.value_or(poincare_constant(f0.grid()));
  rep.mean = mass(f0);
  rep.kappa = kappa(params, rep.mean, rep.poincare);
  rep.threshold = peclet_threshold(params, rep.mean, rep.poincare);
  rep.is_small_pe = std::abs(params.pe) < rep.threshold;
  rep.initial_l2_to_const = l2_distance_to_constant(f0, rep.mean);
  rep.final_l2_to_const = rep.initial_l2_to_const;
  rep.measured_rate = std::numeric_limits<double>::quiet_NaN();
  if (!rep.is_small_pe) return rep;

  RunOptions opts;
  opts.snapshot_stride = 1;
  opts.keep_snapshots = false;
  opts.k_max = 1;
  const Trajectory traj = run(f0, params, t_end, opts);

  std::vector<double> t, w;
  rep.pointwise_bound_ok = true;
  const double w0 = traj.diagnostics.front().l2_to_const;
  for (const auto& r : traj.diagnostics) {
    t.push_back(r.t);
    w.push_back(r.l2_to_const);
    const double bound = std::exp(-(rep.kappa - tol) * r.t) * w0;
    if (r.l2_to_const > bound * (1.0 + 1e-12)) rep.pointwise_bound_ok = false;
  }
  rep.final_l2_to_const = w.back();
  rep.measured_rate = fit_decay_rate(t, w, {0.5 * t_end, t_end + params.dt});
  rep.bound_satisfied = rep.pointwise_bound_ok && rep.measured_rate >= rep.kappa - tol;
  return rep;
}

double stationary_residual(const Field3& f, const Params& params) {
  return l2_norm(rhs(f, params));
}

StationaryResult solve_stationary(const Field3& guess, const Params& params, double tol,
                                  double t_max) {
  params.validate();
  if (!check_admissible(guess).ok) {
    throw Error(ErrorKind::AdmissibilityViolation, "stationary solve needs an admissible guess");
  }
  const double target = mass(guess);
  auto finish = [&](Field3 f, double residual, double t) {
    double dist = 0.0;
    for (double v : f.values()) dist = std::max(dist, std::abs(v - target));
    return StationaryResult{std::move(f), residual, t, dist};
  };

  Field3 f = guess;
  double residual = stationary_residual(f, params);
  if (residual < tol) return finish(std::move(f), residual, 0.0);

  const std::int64_t steps = step_count(t_max, params.dt);
  for (std::int64_t step = 1; step <= steps; ++step) {
    try {
      f = step_imex(f, params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NumericalBlowup) throw;
      throw Error(ErrorKind::NumericalBlowup, std::string(e.what()) + " (step " +
                                                  std::to_string(step) + ")", step);
    }
    if (step % kResidualCheckEvery == 0 || step == steps) {
      residual = stationary_residual(f, params);
      if (residual < tol) {
        return finish(std::move(f), residual, static_cast<double>(step) * params.dt);
      }
    }
  }
  throw Error(ErrorKind::NotConverged, "no stationary state reached by t_max=" +
                                           std::to_string(t_max) +
                                           " (residual " + std::to_string(residual) + ")");
}

SpatialAverageReport spatial_average_decay(const Trajectory& traj, double tol) {
  if (traj.snapshots.size() < 10 || traj.snapshots.size() != traj.times.size()) {
    throw Error(ErrorKind::TooFewSnapshots, "spatial average check needs 10 snapshots");
  }
  const GridSpec& g = traj.grid;
  const std::vector<double> h0 = angular_profile(traj.snapshots.front());
  double mean = 0.0;
  for (double v : h0) mean += v;
  mean /= static_cast<double>(h0.size());

  std::vector<double> dev;
  for (const auto& f : traj.snapshots) {
    const std::vector<double> h = angular_profile(f);
    double acc = 0.0;
    for (double v : h) acc += (v - mean) * (v - mean);
    dev.push_back(std::sqrt(acc * g.dtheta()));
  }

  SpatialAverageReport rep;
  rep.initial_deviation = dev.front();
  rep.final_deviation = dev.back();
  if (dev.front() < kDegenerateDeviation) {
    rep.degenerate = true;
    rep.bound_ok = true;
    return rep;
  }

  rep.bound_ok = true;
  const double floor = 1e-12 * dev.front();
  for (std::size_t j = 0; j < dev.size(); ++j)
    for (std::size_t i = j + 1; i < dev.size(); ++i) {
      const double bound = std::exp(-(1.0 - tol) * (traj.times[i] - traj.times[j])) * dev[j];
      if (dev[i] > bound + floor) rep.bound_ok = false;
    }
  rep.measured_rate = fit_decay_rate(traj.times, dev, {traj.times.front(), traj.times.back()});
  return rep;
}

}  // namespace activeflow
