#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "activeflow/commands.hpp"
#include "activeflow/error.hpp"
#include "activeflow/io.hpp"

using namespace activeflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "activeflow_test_commands" / name;
  fs::remove_all(dir);
  return dir;
}

std::string config_text(const std::string& initial, double t_end, const std::string& extra,
                        double pe = 0.05, int n = 8, double dt = 0.01) {
  std::ostringstream s;
  s << R"({"grid": {"n_x": )" << n << R"(, "n_theta": )" << n << R"(}, "params": {"pe": )" << pe
    << R"(, "de": 1.0, "dt": )" << dt << R"(}, "initial": )" << initial << R"(, "t_end": )"
    << t_end << extra << "}";
  return s.str();
}

const std::string kRandom = R"({"kind": "random_bandlimited", "mass": 24.8, "amplitude": 0.5, "max_mode": 2, "seed": 4})";

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string drop_first_column(const std::string& row) { return row.substr(row.find(',')); }

}  // namespace

TEST_CASE("simulate on constant data") {
  const fs::path dir = scratch_dir("constant");
  const RunConfig cfg = parse_config(config_text(R"({"kind": "constant", "mass": 24.8})", 0.5,
                                                 ", \"output_dir\": \"" + dir.string() + "\""));
  std::ostringstream out;
  CHECK(cmd_simulate(cfg, out) == kExitOk);
  CHECK(out.str().find("\"status\": \"ok\"") != std::string::npos);
  const auto rows = lines_of(dir / "diagnostics.csv");
  REQUIRE(rows.size() == 52);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(drop_first_column(rows[i]) == drop_first_column(rows[1]));
  for (int step : {0, 10, 20, 30, 40, 50}) CHECK(fs::exists(dir / ("snap_" + std::to_string(step) + ".bin")));
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("simulate is deterministic and resumes exactly") {
  const fs::path full = scratch_dir("full"), part = scratch_dir("part"), again = scratch_dir("again");
  auto cfg_for = [&](const fs::path& d, double t_end, const std::string& more = "") {
    return parse_config(config_text(kRandom, t_end,
                                    ", \"checkpoint_every\": 25, \"output_dir\": \"" + d.string() + "\"" + more));
  };
  std::ostringstream sink;
  REQUIRE(cmd_simulate(cfg_for(full, 1.0), sink) == kExitOk);
  REQUIRE(cmd_simulate(cfg_for(again, 1.0), sink) == kExitOk);
  CHECK(lines_of(full / "diagnostics.csv") == lines_of(again / "diagnostics.csv"));

  REQUIRE(cmd_simulate(cfg_for(part, 0.5), sink) == kExitOk);
  REQUIRE(cmd_simulate(cfg_for(part, 1.0, ", \"resume\": true"), sink) == kExitOk);
  const auto a = lines_of(full / "diagnostics.csv");
  const auto b = lines_of(part / "diagnostics.csv");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 1; i < a.size(); ++i) {
    std::istringstream sa(a[i]), sb(b[i]);
    for (std::string x, y; std::getline(sa, x, ',') && std::getline(sb, y, ',');) {
      const double u = std::stod(x), v = std::stod(y);
      CHECK(std::abs(u - v) <= 1e-14 * std::max(1.0, std::abs(u)));
    }
  }
  const auto [h1, f1] = read_snapshot(full / "snap_100.bin");
  const auto [h2, f2] = read_snapshot(part / "snap_100.bin");
  for (std::size_t i = 0; i < f1.size(); ++i) CHECK(std::abs(f1[i] - f2[i]) <= 1e-14);
}

TEST_CASE("resume refuses a different configuration") {
  const fs::path dir = scratch_dir("mismatch");
  std::ostringstream sink;
  const std::string out = ", \"checkpoint_every\": 10, \"output_dir\": \"" + dir.string() + "\"";
  REQUIRE(cmd_simulate(parse_config(config_text(kRandom, 0.2, out)), sink) == kExitOk);
  try {
    cmd_simulate(parse_config(config_text(kRandom, 0.4, out + ", \"resume\": true", 0.06)), sink);
    FAIL("expected ConfigMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigMismatch);
  }
  try {
    cmd_simulate(parse_config(config_text(kRandom, 0.4, ", \"resume\": true, \"output_dir\": \"" +
                                                            scratch_dir("nockpt").string() + "\"")),
                 sink);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("run_command reports errors as JSON") {
  const fs::path dir = scratch_dir("blowup");
  fs::create_directories(dir);
  const fs::path cfg = dir / "blowup.json";
  std::ofstream(cfg) << config_text(
      R"({"kind": "single_mode", "mass": 24.8, "amplitude": 0.5, "mode": [1, 0, 0]})", 100.0,
      ", \"output_dir\": \"" + (dir / "out").string() + "\"", 1e4, 16, 1.0);
  std::ostringstream out, err;
  CHECK(run_command("simulate", cfg, out, err) == kExitRuntimeError);
  CHECK(err.str().find("\"error\":\"NumericalBlowup\"") != std::string::npos);
  CHECK(err.str().find("\"step\":") != std::string::npos);

  std::ostringstream err2;
  CHECK(run_command("simulate", dir / "nope.json", out, err2) == kExitRuntimeError);
  CHECK(err2.str().find("IoError") != std::string::npos);

  std::ostringstream err3;
  CHECK(run_command("explode", cfg, out, err3) == kExitRuntimeError);
  CHECK(err3.str().find("InvalidArgument") != std::string::npos);
}

TEST_CASE("verify reports failures and skips") {
  std::ostringstream out;
  const RunConfig bad = parse_config(config_text(R"({"kind": "constant", "mass": 24.8})", 1.0,
                                                 ", \"verify\": {\"checks\": [3]}", 0.05, 32, 26.405));
  CHECK(cmd_verify(bad, out) == kExitVerificationFailed);
  CHECK(out.str().find("FAIL") != std::string::npos);

  std::ostringstream out2;
  const RunConfig pe0 = parse_config(config_text(R"({"kind": "constant", "mass": 24.8})", 1.0,
                                                 ", \"verify\": {\"checks\": [1, 2, 10]}", 0.0, 16));
  CHECK(cmd_verify(pe0, out2) == kExitOk);
  CHECK(out2.str().find("SKIP") != std::string::npos);
  CHECK(out2.str().find("2 passed, 0 failed, 1 skipped") != std::string::npos);
}

TEST_CASE("decay, stationary and oracle-compare commands") {
  std::ostringstream out;
  const RunConfig d = parse_config(config_text(
      R"({"kind": "single_mode", "mass": 24.8, "amplitude": 0.5, "mode": [1, 0, 0]})", 5.0, "", 0.0, 16));
  CHECK(cmd_decay(d, out) == kExitOk);
  CHECK(out.str().find("\"bound_satisfied\": true") != std::string::npos);

  std::ostringstream s;
  const RunConfig c = parse_config(config_text(R"({"kind": "constant", "mass": 24.8})", 1.0, ""));
  CHECK(cmd_stationary(c, s) == kExitOk);
  CHECK(s.str().find("\"converged\": true") != std::string::npos);

  std::ostringstream o;
  const RunConfig r = parse_config(config_text(
      R"({"kind": "random_bandlimited", "mass": 24.8, "amplitude": 0.3, "max_mode": 1, "seed": 3})", 0.1, ""));
  CHECK(cmd_oracle_compare(r, o) == kExitOk);
  CHECK(o.str().find("PASS") != std::string::npos);

  std::ostringstream big;
  CHECK_THROWS_AS(cmd_oracle_compare(parse_config(config_text(kRandom, 0.1, "", 0.05, 32)), big), Error);
}

TEST_CASE("thread count from the environment") {
  ::setenv("ACTIVEFLOW_THREADS", "2", 1);
  CHECK(configure_threads_from_env() == 2);
  ::setenv("ACTIVEFLOW_THREADS", "zero", 1);
  CHECK_THROWS_AS(configure_threads_from_env(), Error);
  ::unsetenv("ACTIVEFLOW_THREADS");
  CHECK(configure_threads_from_env() == 1);
}
