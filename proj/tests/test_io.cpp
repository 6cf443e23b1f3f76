#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>

#include "activeflow/dynamics.hpp"
#include "activeflow/error.hpp"
#include "activeflow/io.hpp"
#include "test_util.hpp"

using namespace activeflow;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"({
  "grid": {"n_x": 16, "n_theta": 8},
  "params": {"pe": 0.05, "de": 1.0, "dt": 0.01},
  "initial": {"kind": "constant", "mass": 24.8},
  "t_end": 1.0
})";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

std::optional<Error> error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "activeflow_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("minimal config and defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.n_x == 16);
  CHECK(c.n_theta == 8);
  CHECK(c.params.pe == 0.05);
  CHECK(c.params.dt == 0.01);
  CHECK(c.params.dealias);
  CHECK_FALSE(c.dt_auto);
  CHECK(c.t_end == 1.0);
  CHECK(c.snapshot_stride == 10);
  CHECK(c.diagnostics.k_max == 6);
  CHECK(c.diagnostics.tail_threshold == 0.25);
  CHECK(c.checkpoint_every == 0);
  CHECK_FALSE(c.resume);
  CHECK(c.verify.checks.empty());
  REQUIRE(std::holds_alternative<ConstantData>(c.initial));
  CHECK(std::get<ConstantData>(c.initial).mass == 24.8);
}

TEST_CASE("type and range errors") {
  auto e = error_of(with(kMinimal, "\"pe\": 0.05", "\"pe\": \"abc\""));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ParseError);
  CHECK(std::string(e->what()).find("params.pe") != std::string::npos);

  e = error_of(with(kMinimal, "\"n_x\": 16", "\"n_x\": 7"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);
  CHECK(std::string(e->what()).find("grid.n_x") != std::string::npos);

  e = error_of(with(kMinimal, "\"t_end\": 1.0", "\"t_end\": 1.0, \"colour\": 3"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);
  CHECK(std::string(e->what()).find("colour") != std::string::npos);

  e = error_of(with(kMinimal, "\"de\": 1.0,", "\"de\": 1.0"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ParseError);
  CHECK(std::string(e->what()).find("line 3") != std::string::npos);

  e = error_of(with(kMinimal, "\"kind\": \"constant\"", "\"kind\": \"gaussian\""));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);

  e = error_of(with(kMinimal, "\"t_end\": 1.0", "\"t_end\": 1.0, \"verify\": {\"checks\": [11]}"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);

  e = error_of(with(kMinimal, "\"de\": 1.0", "\"de\": 0.0"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);

  e = error_of(with(kMinimal, "\"t_end\": 1.0", "\"snapshot_stride\": 5"));
  REQUIRE(e);
  CHECK(e->kind() == ErrorKind::ValidationError);
}

TEST_CASE("automatic time step") {
  const RunConfig a = parse_config(with(kMinimal, "\"dt\": 0.01", "\"dt\": \"auto\""));
  CHECK(a.dt_auto);
  const Field3 f0 = make_initial(a.initial, a.grid());
  const double expect = std::min(std::max(0.5 * cfl_dt(f0, a.params), 1e-5), 1.0 / 100.0);
  CHECK(a.params.dt == doctest::Approx(expect).epsilon(1e-15));
  CHECK(a.params.dt > 0.0);

  const RunConfig b = parse_config(with(kMinimal, ", \"dt\": 0.01", ""));
  CHECK(b.dt_auto);
  CHECK(b.params.dt == a.params.dt);
}

TEST_CASE("configuration hash") {
  const RunConfig a = parse_config(kMinimal);
  CHECK(config_hash(a) == config_hash(parse_config(kMinimal)));
  CHECK(config_hash(a) ==
        config_hash(parse_config(with(kMinimal, "\"t_end\": 1.0", "\"t_end\": 3.0, \"output_dir\": \"x\""))));
  CHECK(config_hash(a) != config_hash(parse_config(with(kMinimal, "\"pe\": 0.05", "\"pe\": 0.06"))));
  CHECK(config_hash(a) != config_hash(parse_config(with(kMinimal, "\"mass\": 24.8", "\"mass\": 24.9"))));
}

TEST_CASE("snapshot round trip") {
  const GridSpec g(8, 4);
  const Field3 f = make_initial(RandomBandlimitedData{5.0, 0.4, 1, 3}, g);
  SnapshotHeader h;
  h.n_x = 8;
  h.n_theta = 4;
  h.time = 0.123456789012345678;
  h.step = 42;
  h.params = testutil::params(0.05, 1.5, 0.003);
  h.config_hash = 0xfedcba9876543210ull;
  h.reference_mean = 1.0 / 3.0;
  const fs::path p = scratch("round_trip.bin");
  write_snapshot(p, f, h);
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));

  const auto [h2, f2] = read_snapshot(p);
  CHECK(h2.n_x == 8);
  CHECK(h2.n_theta == 4);
  CHECK(h2.time == h.time);
  CHECK(h2.step == 42);
  CHECK(h2.params.de == 1.5);
  CHECK(h2.params.dt == 0.003);
  CHECK(h2.config_hash == h.config_hash);
  CHECK(h2.reference_mean == h.reference_mean);
  REQUIRE(f2.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f2[i] == f[i]);

  std::ifstream in(p, std::ios::binary);
  std::string header;
  std::getline(in, header);
  const auto payload = static_cast<std::size_t>(fs::file_size(p)) - header.size() - 1;
  CHECK(payload == 8 * f.size());
  CHECK(header.find("\"payload_bytes\":2048") != std::string::npos);

  fs::resize_file(p, fs::file_size(p) - 8);
  CHECK_THROWS_AS(read_snapshot(p), Error);
  CHECK_THROWS_AS(read_snapshot(scratch("missing.bin")), Error);
}

TEST_CASE("CSV layout") {
  CHECK(csv_header(2) == "t,mass,l2_to_const,linf,rho_min,rho_max,grad_l2,spectral_tail,lp_0,lp_1,lp_2");
  DiagnosticsRecord r;
  r.t = 0.1;
  r.mass = 1.0;
  r.lp_ladder = {0.5, 0.25};
  const std::string row = csv_row(r);
  CHECK(row.rfind("0.10000000000000001,1,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
}

TEST_CASE("report JSON writes NaN as null") {
  EquilibriumReport r;
  r.measured_rate = std::numeric_limits<double>::quiet_NaN();
  const std::string j = to_json(r);
  CHECK(j.find("\"measured_rate\": null") != std::string::npos);
  CHECK(j.find("\"poincare_constant\"") != std::string::npos);
}

TEST_CASE("initial data serialisation round trip") {
  const InitialDataSpec specs[] = {ConstantData{3.0}, SingleModeData{2.0, 0.3, {1, -2, 3}},
                                   RandomBandlimitedData{1.5, 0.2, 4, 99}};
  const GridSpec g(8, 8);
  for (const auto& s : specs) {
    const InitialDataSpec back = parse_initial(serialize_initial(s));
    CHECK(back.index() == s.index());
    CHECK(serialize_initial(back) == serialize_initial(s));
    CHECK(testutil::linf(make_initial(back, g), make_initial(s, g)) == 0.0);
  }
  CHECK_THROWS_AS(parse_initial("{\"kind\": \"constant\""), Error);
}
