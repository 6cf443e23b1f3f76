#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "activeflow/core_types.hpp"
#include "activeflow/diagnostics.hpp"
#include "activeflow/error.hpp"
#include "activeflow/spectral.hpp"
#include "test_util.hpp"

using namespace activeflow;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an activeflow::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("grid spacing") {
  CHECK(make_grid(32, 32).dx() == doctest::Approx(2 * pi / 32).epsilon(1e-15));
  CHECK(make_grid(4, 4).dx() == doctest::Approx(pi / 2).epsilon(1e-15));
  const GridSpec g(8, 6);
  CHECK(g.size() == 8u * 8u * 6u);
  CHECK(g.plane_size() == 64u);
  CHECK(g.index(1, 2, 3) == (1u * 8u + 2u) * 6u + 3u);
  CHECK(g.x(0) == 0.0);
  CHECK(g.theta(5) == doctest::Approx(5 * 2 * pi / 6));
}

TEST_CASE("grid rejects odd or tiny counts") {
  CHECK(kind_of([] { make_grid(7, 8); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { make_grid(8, 5); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { make_grid(2, 8); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("params validation") {
  CHECK_NOTHROW(Params{0.1, 1.0, 0.01, true}.validate());
  CHECK_THROWS_AS(Params({0.1, 0.0, 0.01, true}).validate(), Error);
  CHECK_THROWS_AS(Params({0.1, 1.0, -1.0, true}).validate(), Error);
  CHECK_THROWS_AS(Params({std::nan(""), 1.0, 0.01, true}).validate(), Error);
}

TEST_CASE("fields reject non-finite entries and wrong sizes") {
  const GridSpec g(4, 4);
  std::vector<double> v(g.size(), 1.0);
  v[3] = std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { Field3(g, v); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { Field3(g, std::vector<double>(5, 0.0)); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { Field2(g, std::vector<double>(g.size(), 0.0)); }) == ErrorKind::InvalidArgument);
  CHECK_NOTHROW(Field2(g, std::vector<double>(g.plane_size(), 0.0)));
}

TEST_CASE("e_vec") {
  auto [c0, s0] = e_vec(0.0);
  CHECK(c0 == 1.0);
  CHECK(s0 == 0.0);
  auto [c1, s1] = e_vec(pi / 2);
  CHECK(std::abs(c1) < 1e-15);
  CHECK(s1 == doctest::Approx(1.0));
  auto [c2, s2] = e_vec(pi);
  CHECK(c2 == doctest::Approx(-1.0));
  CHECK(std::abs(s2) < 1e-15);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  for (int i = 0; i < 1000; ++i) {
    auto [c, s] = e_vec(angle(rng));
    CHECK(std::abs(std::hypot(c, s) - 1.0) <= 1e-15);
  }
}

TEST_CASE("constant initial data") {
  const Field3 f = make_initial(ConstantData{1.0}, GridSpec(32, 32));
  for (double v : f.values()) CHECK(v == doctest::Approx(1.0 / kBoxVolume).epsilon(1e-15));
}

TEST_CASE("single mode initial data") {
  const GridSpec g(32, 32);
  const Field3 f = make_initial(SingleModeData{1.0, 0.1, {1, 0, 0}}, g);
  double lo = 1e300;
  for (int i1 = 0; i1 < 32; ++i1)
    for (int i2 = 0; i2 < 32; ++i2)
      for (int it = 0; it < 32; ++it) {
        const double expect = (1.0 + 0.1 * std::cos(g.x(i1))) / kBoxVolume;
        CHECK(std::abs(f.at(i1, i2, it) - expect) < 1e-16);
        lo = std::min(lo, f.at(i1, i2, it));
      }
  CHECK(lo == doctest::Approx(0.9 / kBoxVolume).epsilon(1e-14));

  CHECK(kind_of([&] { make_initial(SingleModeData{1.0, 1.5, {1, 0, 0}}, g); }) ==
        ErrorKind::AdmissibilityViolation);
  CHECK(kind_of([&] { make_initial(SingleModeData{1.0, 0.1, {17, 0, 0}}, g); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("random band-limited data") {
  const GridSpec g(16, 16);
  const RandomBandlimitedData spec{20.0, 0.8, 3, 99};
  const Field3 a = make_initial(spec, g);
  const Field3 b = make_initial(spec, g);
  CHECK(testutil::linf(a, b) == 0.0);

  RandomBandlimitedData other = spec;
  other.seed = 100;
  CHECK(testutil::linf(a, make_initial(other, g)) > 0.0);

  double lo = 1e300;
  for (double v : a.values()) lo = std::min(lo, v);
  CHECK(lo >= 0.01 * spec.mass / kBoxVolume * (1.0 - 1e-12));
  CHECK(check_admissible(a).ok);

  // Band limit: nothing above |k| = 3 in any direction.
  const Spectrum s = forward(a);
  for (int i1 = 0; i1 < 16; ++i1)
    for (int i2 = 0; i2 < 16; ++i2)
      for (int j = 0; j < s.n_half(); ++j) {
        if (std::abs(wavenumber(i1, 16)) <= 3 && std::abs(wavenumber(i2, 16)) <= 3 && j <= 3) continue;
        CHECK(std::abs(s[s.index(i1, i2, j)]) < 1e-15);
      }

  CHECK(kind_of([&] { make_initial(RandomBandlimitedData{1.0, 0.1, 9, 1}, g); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { make_initial(RandomBandlimitedData{1.0, 0.1, 0, 1}, g); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("generated data carries the requested mass") {
  const GridSpec g(16, 8);
  const std::vector<InitialDataSpec> specs = {
      ConstantData{3.0}, SingleModeData{5.0, 0.4, {1, -2, 3}}, RandomBandlimitedData{7.0, 0.6, 4, 1},
      RandomBandlimitedData{2.0, 0.9, 2, 12345}};
  for (const auto& spec : specs) {
    const double m = std::visit([](const auto& d) { return d.mass; }, spec);
    CHECK(std::abs(total_mass(make_initial(spec, g)) - m) <= 1e-12 * m);
  }
}

TEST_CASE("admissibility report") {
  const GridSpec g(8, 8);
  const auto r = check_admissible(Field3(g, 1.0 / kBoxVolume));
  CHECK(r.ok);
  CHECK(r.max_rho == doctest::Approx(1.0 / (4 * pi * pi)).epsilon(1e-14));

  // ρ ≡ 1 is the admissible boundary.
  const auto edge = check_admissible(Field3(g, 1.0 / (2 * pi)));
  CHECK(edge.ok);
  CHECK(edge.max_rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(check_admissible(Field3(g, 1.01 / (2 * pi))).ok);

  std::vector<double> v(g.size(), 0.001);
  v[17] = -1e-6;
  const auto neg = check_admissible(Field3(g, v));
  CHECK_FALSE(neg.ok);
  CHECK(neg.min_f == -1e-6);
}

TEST_CASE("constant data is admissible exactly up to m = (2 pi)^2") {
  const GridSpec g(4, 4);
  const double edge = 4 * pi * pi;
  for (double m : {0.0, 1.0, 10.0, edge * (1 - 1e-9)}) {
    CHECK(check_admissible(Field3(g, m / kBoxVolume)).ok);
  }
  CHECK_FALSE(check_admissible(Field3(g, 1.001 * edge / kBoxVolume)).ok);
  CHECK(kind_of([&] { make_initial(ConstantData{1.001 * edge}, g); }) ==
        ErrorKind::AdmissibilityViolation);
}
