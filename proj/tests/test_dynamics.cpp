#include <doctest.h>

#include <cmath>

#include "activeflow/core_types.hpp"
#include "activeflow/diagnostics.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/error.hpp"
#include "activeflow/oracle.hpp"
#include "activeflow/spectral.hpp"
#include "test_util.hpp"

using namespace activeflow;
using testutil::linf;
using testutil::params;
using testutil::sample;

namespace {

constexpr double kMean = 0.1;

Field3 run_to(const Field3& f0, const Params& p, double t_end) {
  RunOptions o;
  o.snapshot_stride = 1u << 30;
  o.keep_snapshots = false;
  o.k_max = 0;
  return *run(f0, p, t_end, o).final_field;
}

}  // namespace

TEST_CASE("constants are stationary") {
  const GridSpec g(16, 8);
  const Field3 c(g, kMean);
  CHECK(linf(rhs(c, params(0.3, 2.0))) < 1e-15);
  const Field3 next = step_imex(c, params(0.3, 2.0, 0.05));
  CHECK(linf(next, c) <= 1e-14 * kMean);
}

TEST_CASE("heat operator eigenfunction at Pe = 0") {
  const GridSpec g(16, 8);
  const Field3 f = sample(g, [](double x1, double, double) { return kMean + 0.01 * std::cos(x1); });
  const Field3 expect = sample(g, [](double x1, double, double) { return -3.0 * 0.01 * std::cos(x1); });
  CHECK(linf(rhs(f, params(0.0, 3.0)), expect) < 1e-14);
}

TEST_CASE("one step at Pe = 0 applies the exact heat factor") {
  const GridSpec g(16, 16);
  const double amp = 0.1 / kBoxVolume;
  const Field3 f = sample(g, [&](double x1, double, double) { return kMean + amp * std::cos(x1); });
  const Field3 next = step_imex(f, params(0.0, 2.0, 0.01));
  const Field3 expect =
      sample(g, [&](double x1, double, double) { return kMean + amp * std::exp(-0.02) * std::cos(x1); });
  CHECK(linf(next, expect) < 1e-10 * amp);
}

TEST_CASE("spectral rhs converges to the finite-difference rhs at second order") {
  const Field3 f8 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.05, 1, 3}, GridSpec(8, 8));
  const Params p = params(0.05);
  double err[3];
  for (int i = 0; i < 3; ++i) {
    const int n = 16 << i;
    const Field3 f = testutil::upsample(f8, n, n);
    err[i] = linf(rhs(f, p), oracle::fd_rhs(f, p));
  }
  MESSAGE("rhs errors " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.3 / 4.0));
  CHECK(std::log2(err[0] / err[1]) >= 1.9);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("single-mode run matches the fine-step oracle") {
  const GridSpec g(16, 16);
  const Field3 f0 = make_initial(SingleModeData{1.0, 0.1, {1, 0, 0}}, g);
  const Params p = params(0.05);
  const Field3 spectral = run_to(f0, p, 1.0);
  const Field3 fd = oracle::fd_run(f0, p, 1.0, oracle::OracleConfig{g, p.dt / 50.0});
  CHECK(linf(spectral, fd) < 1e-4);
}

TEST_CASE("CFL estimate") {
  const GridSpec g(32, 32);
  const Field3 zero(g, 0.0);
  CHECK(cfl_dt(zero, params(0.0)) >= 1e10);
  const double dx = kTwoPi / 32;
  CHECK(cfl_dt(zero, params(1.0)) == doctest::Approx(0.25 * dx).epsilon(1e-14));
  CHECK(cfl_dt(zero, params(1.0)) == doctest::Approx(0.0491).epsilon(1e-3));
  CHECK(cfl_dt(zero, params(2.0)) == doctest::Approx(0.5 * cfl_dt(zero, params(1.0))).epsilon(1e-14));
}

TEST_CASE("empty run keeps only the initial record") {
  const Field3 f0 = make_initial(ConstantData{10.0}, GridSpec(8, 8));
  const Trajectory t = run(f0, params(0.05), 0.0, 5);
  CHECK(t.diagnostics.size() == 1);
  CHECK(t.times.size() == 1);
  CHECK(t.snapshots.size() == 1);
  CHECK(t.diagnostics[0].t == 0.0);
}

TEST_CASE("constant data keeps constant diagnostics") {
  const Field3 f0 = make_initial(ConstantData{10.0}, GridSpec(8, 8));
  const Trajectory t = run(f0, params(0.05), 1.0, 10);
  CHECK(t.diagnostics.size() == 101);
  CHECK(t.times.size() == 11);
  const auto& a = t.diagnostics.front();
  for (const auto& r : t.diagnostics) {
    CHECK(r.mass == doctest::Approx(a.mass).epsilon(1e-14));
    CHECK(r.l2_to_const <= 1e-14);
    CHECK(r.linf == doctest::Approx(a.linf).epsilon(1e-14));
    CHECK(r.rho_max == doctest::Approx(a.rho_max).epsilon(1e-14));
    CHECK(r.grad_l2 <= 1e-14);
  }
  for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
}

TEST_CASE("linear decay of a single mode") {
  const Field3 f0 = make_initial(SingleModeData{10.0, 0.5, {1, 0, 0}}, GridSpec(16, 16));
  const Trajectory t = run(f0, params(0.0), 1.0, 10);
  const double ratio = t.diagnostics.back().l2_to_const / t.diagnostics.front().l2_to_const;
  CHECK(std::abs(ratio - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("mass is invariant at every step") {
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.6, 4, 8}, GridSpec(16, 16));
  const Trajectory t = run(f0, params(0.08), 2.0, 50);
  const double m0 = mass(f0);
  for (const auto& r : t.diagnostics) CHECK(std::abs(r.mass - m0) <= 1e-13 * m0);
}

TEST_CASE("Pe = 0 evolves mode by mode") {
  const GridSpec g(8, 8);
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.6, 3, 4}, g);
  const Field3 numeric = run_to(f0, params(0.0, 1.7, 0.05), 0.5);
  const Field3 exact = oracle::exact_linear_solution(f0, 1.7, 0.5);
  CHECK(linf(numeric, exact) <= 1e-10 * linf(f0));
}

TEST_CASE("time stepping is second order") {
  const GridSpec g(16, 16);
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.6, 2, 17}, g);
  const double T = 0.5, dt = 0.05;
  const Field3 ref = run_to(f0, params(0.05, 1.0, dt / 64), T);
  double e[3];
  for (int i = 0; i < 3; ++i) e[i] = linf(run_to(f0, params(0.05, 1.0, dt / (1 << i)), T), ref);
  MESSAGE("time errors " << e[0] << " " << e[1] << " " << e[2]);
  CHECK(std::log2(e[0] / e[1]) >= 1.9);
  CHECK(std::log2(e[1] / e[2]) >= 1.9);
}

TEST_CASE("density stays within bounds for admissible data") {
  const Field3 f0 = make_initial(RandomBandlimitedData{0.12 * kBoxVolume, 0.3, 3, 7}, GridSpec(32, 32));
  RunOptions o;
  o.snapshot_stride = 1000;
  o.keep_snapshots = false;
  o.k_max = 0;
  const Trajectory t = run(f0, params(0.1), 1.0, o);
  for (const auto& r : t.diagnostics) {
    CHECK(r.rho_min >= -1e-6);
    CHECK(r.rho_max <= 1.0 + 1e-6);
  }
}

TEST_CASE("blowup is reported with the failing step") {
  const Field3 f0 = make_initial(SingleModeData{24.8, 0.5, {1, 0, 0}}, GridSpec(16, 16));
  try {
    run(f0, params(1e4, 1.0, 1.0), 100.0, 10);
    FAIL("expected NumericalBlowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericalBlowup);
    CHECK(e.step() >= 1);
  }
}

TEST_CASE("run rejects inadmissible data and bad arguments") {
  const GridSpec g(8, 8);
  std::vector<double> v(g.size(), 0.01);
  v[0] = -0.5;
  CHECK_THROWS_AS(run(Field3(g, v), params(0.05), 1.0, 1), Error);
  CHECK_THROWS_AS(run(Field3(g, 0.01), params(0.05), 1.0, 0), Error);
  CHECK_THROWS_AS(run(Field3(g, 0.01), params(0.05, -1.0), 1.0, 1), Error);
}

TEST_CASE("runs are deterministic") {
  const Field3 f0 = make_initial(RandomBandlimitedData{kMean * kBoxVolume, 0.5, 3, 2}, GridSpec(16, 16));
  const Field3 a = run_to(f0, params(0.05), 0.3);
  const Field3 b = run_to(f0, params(0.05), 0.3);
  CHECK(linf(a, b) == 0.0);
}

TEST_CASE("step count lands on t_end") {
  CHECK(step_count(1.0, 0.01) == 100);
  CHECK(step_count(20.0, 0.01) == 2000);
  CHECK(step_count(0.0, 0.01) == 0);
  CHECK(step_count(0.105, 0.01) == 11);
}

TEST_CASE("rescaling factor") {
  CHECK(rescale_factor(1.0, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rescale_factor(0.25, 0.04, 1.0) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK_THROWS_AS(rescale_factor(0.5, 0.5, 0.0), Error);
}

TEST_CASE("rescaled field") {
  const GridSpec g(16, 16);
  const RescaleCenter center{1.0, {0.3, 1.1, 2.0}};
  const RescaledField c = rescale_field(Field3(g, 0.02), center, 0.5, 0.25, 0.0, 2.0, 6);
  CHECK(c.ell == doctest::Approx(rescale_factor(0.5, 0.25, 2.0)));
  CHECK(c.points_per_axis == 6);
  CHECK(c.values.size() == 216u);
  for (double v : c.values) CHECK(v == doctest::Approx(c.ell * 0.02).epsilon(1e-13));

  const Field3 wave = sample(g, [](double x1, double x2, double th) {
    return std::cos(x1) + 0.5 * std::sin(2 * x2 - th);
  });
  const double r = 0.4;
  const RescaledField w = rescale_field(wave, center, r, 0.5, 0.1, 0.9, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = 0; d < 4; ++d) {
        auto z = [](int p) { return -1.0 + (2.0 * p + 1.0) / 4.0; };
        const double x1 = center.xi0[0] + r * z(a), x2 = center.xi0[1] + r * z(b);
        const double th = center.xi0[2] + r * z(d);
        const double expect = w.ell * (std::cos(x1) + 0.5 * std::sin(2 * x2 - th));
        CHECK(std::abs(w.values[(a * 4 + b) * 4 + d] - expect) < 1e-12);
      }
}

TEST_CASE("rescaled field preconditions") {
  const Field3 f(GridSpec(8, 8), 0.01);
  CHECK_THROWS_AS(rescale_field(f, RescaleCenter{4.0, {}}, 1.0, 0.5, 0.0, 1.0), Error);
  CHECK_THROWS_AS(rescale_field(f, RescaleCenter{0.5, {}}, 0.6, 0.5, 0.0, 1.0), Error);
  CHECK_THROWS_AS(rescale_field(f, RescaleCenter{4.0, {}}, 0.5, 1.5, 0.0, 1.0), Error);
  try {
    rescale_field(f, RescaleCenter{0.5, {}}, 0.6, 0.5, 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RadiusTooLarge);
  }
}

TEST_CASE("problem rescaling") {
  const RescaleMap id = rescale_problem(params(1.0, 1.0));
  CHECK(id.a == 1.0);
  CHECK(id.b == 1.0);
  CHECK(id.c == 1.0);
  const RescaleMap m = rescale_problem(params(2.0, 4.0));
  CHECK(m.a == 1.0);
  CHECK(m.b == 2.0);
  CHECK(m.c == 1.0);
  try {
    rescale_problem(params(0.0));
    FAIL("expected ZeroPeclet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroPeclet);
  }
}
