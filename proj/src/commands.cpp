#include "activeflow/commands.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "activeflow/acceptance.hpp"
#include "activeflow/diagnostics.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/equilibrium.hpp"
#include "activeflow/error.hpp"
#include "activeflow/oracle.hpp"
#include "activeflow/spectral.hpp"

namespace activeflow {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kOracleTolerance = 1e-3;

// Single background thread running file writes in submission order. post()
// blocks while one job is already waiting, so at most one snapshot buffer is
// held on top of the one being written.
class AsyncWriter {
 public:
  AsyncWriter() : thread_([this] { loop(); }) {}
  ~AsyncWriter() {
    try {
      finish();
    } catch (...) {
    }
  }

  void post(std::function<void()> job) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return queue_.empty() || error_; });
    if (error_) std::rethrow_exception(error_);
    queue_.push_back(std::move(job));
    cv_.notify_all();
  }

  void finish() {
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      stopping_ = true;
      cv_.notify_all();
    }
    thread_.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !queue_.empty() || stopping_; });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
        cv_.notify_all();
      }
      try {
        job();
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
        queue_.clear();
        cv_.notify_all();
      }
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::exception_ptr error_;
  std::thread thread_;
};

fs::path snapshot_path(const fs::path& dir, std::int64_t step) {
  return dir / ("snap_" + std::to_string(step) + ".bin");
}

// Keeps the header and the first `rows` data lines of an existing CSV.
void truncate_csv(const fs::path& path, std::int64_t rows) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string() + " for resume");
  std::vector<std::string> lines;
  std::string line;
  while (static_cast<std::int64_t>(lines.size()) < rows + 1 && std::getline(in, line)) {
    lines.push_back(line);
  }
  if (static_cast<std::int64_t>(lines.size()) < rows + 1) {
    throw Error(ErrorKind::IoError, path.string() + " holds fewer rows than the checkpoint step");
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error(ErrorKind::IoError, "cannot rewrite " + path.string());
}

json truncation_summary(const RunConfig& cfg, const fs::path& dir, std::int64_t last_step) {
  const auto& tc = cfg.diagnostics.truncation;
  const auto [ta, tb] = tc.window.value_or(std::make_pair(0.5 * cfg.t_end, cfg.t_end));
  const double dt = cfg.params.dt;
  const auto stride = static_cast<std::int64_t>(cfg.snapshot_stride);

  Trajectory traj(cfg.grid());
  traj.params = cfg.params;
  for (std::int64_t step = 0; step <= last_step; step += stride) {
    const double t = static_cast<double>(step) * dt;
    if (t < ta - 1e-12 || t > tb + 1e-12) continue;
    const fs::path p = snapshot_path(dir, step);
    if (!fs::exists(p)) continue;
    traj.snapshots.push_back(read_snapshot(p).second);
    traj.times.push_back(t);
    traj.snapshot_steps.push_back(step);
  }
  json j;
  try {
    if (traj.times.empty()) {
      throw Error(ErrorKind::WindowTooShort, "no snapshots inside the truncation window");
    }
    const std::pair<double, double> used{traj.times.front(), traj.times.back()};
    const TruncationLadder lad = truncation_energy(traj, used, tc.k_max);
    j["window"] = {used.first, used.second};
    j["levels"] = lad.levels;
    j["energies"] = lad.energies;
  } catch (const Error& e) {
    j["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }
  return j;
}

}  // namespace

std::string error_json(std::string_view kind, std::string_view message, std::int64_t step) {
  json j = {{"error", std::string(kind)}, {"message", std::string(message)}};
  if (step >= 0) j["step"] = step;
  return j.dump();
}

int configure_threads_from_env() {
  int n = 1;
  if (const char* env = std::getenv("ACTIVEFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) {
      throw Error(ErrorKind::ValidationError,
                  "ACTIVEFLOW_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    n = static_cast<int>(v);
  }
  set_fft_threads(n);
  return n;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const fs::path csv_path = dir / "diagnostics.csv";
  const fs::path ckpt_path = dir / "checkpoint.bin";
  const std::uint64_t hash = config_hash(cfg);
  const GridSpec grid = cfg.grid();

  const Field3 initial = make_initial(cfg.initial, grid);
  Field3 f0 = initial;
  std::int64_t start = 0;
  double reference = mass(initial);
  if (cfg.resume) {
    if (!fs::exists(ckpt_path)) {
      throw Error(ErrorKind::IoError, "resume requested but " + ckpt_path.string() + " is missing");
    }
    auto [header, field] = read_snapshot(ckpt_path);
    if (header.config_hash != hash) {
      throw Error(ErrorKind::ConfigMismatch,
                  "checkpoint was written by a different configuration; refusing to resume");
    }
    f0 = std::move(field);
    start = header.step;
    reference = header.reference_mean;
    truncate_csv(csv_path, start);
  } else {
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << csv_header(cfg.diagnostics.k_max) << '\n';
    if (!csv) throw Error(ErrorKind::IoError, "cannot write " + csv_path.string());
  }

  auto csv = std::make_shared<std::ofstream>(csv_path, std::ios::app);
  if (!*csv) throw Error(ErrorKind::IoError, "cannot open " + csv_path.string());
  AsyncWriter writer;
  std::string rows;
  auto flush_rows = [&] {
    if (rows.empty()) return;
    writer.post([csv, chunk = std::move(rows)] {
      *csv << chunk;
      csv->flush();
      if (!*csv) throw Error(ErrorKind::IoError, "write to diagnostics.csv failed");
    });
    rows.clear();
  };
  auto header_at = [&](std::int64_t step, double t) {
    SnapshotHeader h;
    h.n_x = grid.n_x();
    h.n_theta = grid.n_theta();
    h.time = t;
    h.step = step;
    h.params = cfg.params;
    h.config_hash = hash;
    h.reference_mean = reference;
    return h;
  };

  double rho_lo = std::numeric_limits<double>::infinity();
  double rho_hi = -rho_lo;
  double drift = 0.0;
  DiagnosticsRecord last;

  RunOptions opts;
  opts.snapshot_stride = cfg.snapshot_stride;
  opts.k_max = cfg.diagnostics.k_max;
  opts.tail_fraction = cfg.diagnostics.tail_threshold;
  opts.keep_snapshots = false;
  opts.start_step = start;
  opts.reference_mean = reference;
  opts.on_record = [&](const DiagnosticsRecord& r) {
    rows += csv_row(r);
    rows += '\n';
    rho_lo = std::min(rho_lo, r.rho_min);
    rho_hi = std::max(rho_hi, r.rho_max);
    drift = std::max(drift, std::abs(r.mass - reference) / std::abs(reference));
    last = r;
  };
  opts.on_snapshot = [&](std::int64_t step, double t, const Field3& f) {
    flush_rows();
    writer.post([p = snapshot_path(dir, step), f, h = header_at(step, t)] { write_snapshot(p, f, h); });
  };
  if (cfg.checkpoint_every > 0) {
    opts.on_step = [&](std::int64_t step, double t, const Field3& f) {
      if (step % cfg.checkpoint_every != 0) return;
      flush_rows();
      writer.post([p = ckpt_path, f, h = header_at(step, t)] { write_snapshot(p, f, h); });
    };
  }

  Trajectory traj(grid);
  try {
    traj = run(f0, cfg.params, cfg.t_end, opts);
  } catch (...) {
    flush_rows();
    writer.finish();
    throw;
  }
  flush_rows();
  writer.finish();

  const std::int64_t last_step = step_count(cfg.t_end, cfg.params.dt);
  const double cp = poincare_constant(grid);
  const double threshold = peclet_threshold(cfg.params, reference, cp);
  json summary = {
      {"status", "ok"},
      {"config_hash", [&] {
         char buf[17];
         std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
         return std::string(buf);
       }()},
      {"steps", last_step},
      {"resumed_from_step", start},
      {"t_final", static_cast<double>(last_step) * cfg.params.dt},
      {"dt", cfg.params.dt},
      {"dt_auto", cfg.dt_auto},
      {"mean", reference},
      {"kappa", kappa(cfg.params, reference, cp)},
      {"threshold", threshold},
      {"poincare_constant", cp},
      {"initial_l2_to_const", l2_distance_to_constant(initial, reference)},
      {"final_l2_to_const", last.l2_to_const},
      {"final_linf", last.linf},
      {"max_relative_mass_drift", drift},
      {"rho_min", rho_lo},
      {"rho_max", rho_hi},
      {"cfl_warnings", traj.cfl_warnings},
      {"truncation", truncation_summary(cfg, dir, last_step)},
  };
  summary["is_small_pe"] = std::abs(cfg.params.pe) < threshold;
  const std::string text = summary.dump(2);
  std::ofstream(dir / "summary.json") << text << '\n';
  out << text << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  AcceptanceSettings s;
  s.n = cfg.n_x;
  s.pe = cfg.params.pe;
  s.dt = cfg.params.dt;
  s.checks = cfg.verify.checks;
  int pass = 0, fail = 0, skip = 0;
  char line[64];
  std::snprintf(line, sizeof line, "verify: n=%d pe=%g dt=%g\n", s.n, s.pe, s.dt);
  out << line << std::flush;
  run_acceptance(s, [&](const CheckResult& r) {
    char head[128];
    std::snprintf(head, sizeof head, "%2d  %s  %-48s %7.1fs  ", r.id,
                  std::string(to_string(r.status)).c_str(), r.name.c_str(), r.seconds);
    out << head << r.detail << '\n' << std::flush;
    (r.status == CheckStatus::Pass ? pass : r.status == CheckStatus::Fail ? fail : skip)++;
  });
  out << pass << " passed, " << fail << " failed, " << skip << " skipped\n";
  return fail == 0 ? kExitOk : kExitVerificationFailed;
}

int cmd_decay(const RunConfig& cfg, std::ostream& out) {
  const Field3 f0 = make_initial(cfg.initial, cfg.grid());
  const EquilibriumReport rep = verify_small_pe_decay(f0, cfg.params, cfg.t_end);
  out << to_json(rep) << '\n';
  return rep.is_small_pe && !rep.bound_satisfied ? kExitVerificationFailed : kExitOk;
}

int cmd_stationary(const RunConfig& cfg, std::ostream& out) {
  const Field3 f0 = make_initial(cfg.initial, cfg.grid());
  const double t_max = cfg.stationary.t_max.value_or(cfg.t_end);
  json j = {{"mean", mass(f0)}, {"tol", cfg.stationary.tol}, {"t_max", t_max}};
  try {
    const StationaryResult res = solve_stationary(f0, cfg.params, cfg.stationary.tol, t_max);
    j["converged"] = true;
    j["residual"] = res.residual;
    j["time"] = res.time;
    j["distance_to_mean"] = res.distance_to_mean;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotConverged) throw;
    j["converged"] = false;
    j["error"] = std::string(to_string(e.kind()));
    j["message"] = e.what();
    out << j.dump(2) << '\n';
    return kExitVerificationFailed;
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_oracle_compare(const RunConfig& cfg, std::ostream& out) {
  const GridSpec grid = cfg.grid();
  if (grid.n_x() > oracle::kMaxOracleGrid || grid.n_theta() > oracle::kMaxOracleGrid) {
    throw Error(ErrorKind::ValidationError, "field 'grid': oracle-compare needs at most 16 points per axis");
  }
  const Field3 f0 = make_initial(cfg.initial, grid);
  RunOptions opts;
  opts.snapshot_stride = std::numeric_limits<std::size_t>::max() / 2;
  opts.keep_snapshots = false;
  opts.k_max = 0;
  const Trajectory traj = run(f0, cfg.params, cfg.t_end, opts);
  const double t = traj.diagnostics.back().t;

  const double h = std::min(grid.dx(), grid.dtheta());
  const double bound = h * h / (6.0 * std::max(cfg.params.de, 1.0));
  const oracle::OracleConfig ocfg{grid, std::min(cfg.params.dt / 50.0, bound)};
  const Field3 ref = oracle::fd_run(f0, cfg.params, t, ocfg);

  double diff = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    diff = std::max(diff, std::abs((*traj.final_field)[i] - ref[i]));
  }
  const bool ok = diff <= kOracleTolerance;
  const json j = {{"status", ok ? "PASS" : "FAIL"},
                  {"max_diff", diff},
                  {"threshold", kOracleTolerance},
                  {"t", t},
                  {"dt", cfg.params.dt},
                  {"dt_fine", ocfg.dt_fine}};
  out << j.dump(2) << '\n';
  return ok ? kExitOk : kExitVerificationFailed;
}

int run_command(std::string_view name, const fs::path& config_path, std::ostream& out,
                std::ostream& err) {
  try {
    configure_threads_from_env();
    const RunConfig cfg = load_config(config_path);
    if (name == "simulate") return cmd_simulate(cfg, out);
    if (name == "verify") return cmd_verify(cfg, out);
    if (name == "decay") return cmd_decay(cfg, out);
    if (name == "stationary") return cmd_stationary(cfg, out);
    if (name == "oracle-compare") return cmd_oracle_compare(cfg, out);
    err << error_json("InvalidArgument", "unknown command '" + std::string(name) + "'") << '\n';
  } catch (const Error& e) {
    err << error_json(to_string(e.kind()), e.what(), e.step()) << '\n';
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what()) << '\n';
  }
  return kExitRuntimeError;
}

}  // namespace activeflow
