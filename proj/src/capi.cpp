#include "activeflow/activeflow.h"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>

#include "activeflow/commands.hpp"
#include "activeflow/core_types.hpp"
#include "activeflow/diagnostics.hpp"
#include "activeflow/dynamics.hpp"
#include "activeflow/equilibrium.hpp"
#include "activeflow/error.hpp"
#include "activeflow/io.hpp"
#include "activeflow/spectral.hpp"

struct af_grid {
  activeflow::GridSpec grid;
};

struct af_field {
  activeflow::Field3 field;
};

namespace {

using namespace activeflow;

static_assert(static_cast<int>(ErrorKind::ConfigMismatch) + 1 == AF_ERR_CONFIG_MISMATCH);

thread_local std::string last_error;

af_status fail(af_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
af_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return AF_OK;
  } catch (const Error& e) {
    return fail(static_cast<af_status>(static_cast<int>(e.kind()) + 1), e.what());
  } catch (const std::exception& e) {
    return fail(AF_ERR_INTERNAL, e.what());
  }
}

Params to_params(const af_params* p) {
  if (!p) throw Error(ErrorKind::InvalidArgument, "params must not be null");
  return Params{p->pe, p->de, p->dt, p->dealias != 0};
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must not be null");
}

// Forwards text to a C callback on every flush.
class CallbackBuf : public std::stringbuf {
 public:
  CallbackBuf(af_write_fn fn, void* user) : fn_(fn), user_(user) {}
  ~CallbackBuf() override { sync(); }

 protected:
  int sync() override {
    const std::string s = str();
    if (fn_ && !s.empty()) fn_(s.data(), s.size(), user_);
    str("");
    return 0;
  }

 private:
  af_write_fn fn_;
  void* user_;
};

}  // namespace

extern "C" {

const char* af_last_error(void) { return last_error.c_str(); }

const char* af_status_name(af_status status) {
  if (status == AF_OK) return "Ok";
  if (status == AF_ERR_INTERNAL) return "InternalError";
  if (status < AF_OK || status > AF_ERR_INTERNAL) return "Unknown";
  static thread_local std::string name;
  name = std::string(to_string(static_cast<ErrorKind>(static_cast<int>(status) - 1)));
  return name.c_str();
}

int af_set_threads(int n) {
  n = std::max(1, n);
  set_fft_threads(n);
  return n;
}

af_status af_grid_create(int n_x, int n_theta, af_grid** out) {
  return guarded([&] {
    require(out, "out");
    *out = new af_grid{GridSpec(n_x, n_theta)};
  });
}

void af_grid_destroy(af_grid* grid) { delete grid; }

af_status af_field_from_initial(const af_grid* grid, const char* initial_json, af_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(initial_json, "initial_json");
    require(out, "out");
    *out = new af_field{make_initial(parse_initial(initial_json), grid->grid)};
  });
}

af_status af_field_from_values(const af_grid* grid, const double* values, size_t count,
                               af_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(values, "values");
    require(out, "out");
    *out = new af_field{Field3(grid->grid, std::vector<double>(values, values + count))};
  });
}

void af_field_destroy(af_field* field) { delete field; }

size_t af_field_size(const af_field* field) { return field ? field->field.size() : 0; }

af_status af_field_values(const af_field* field, double* out, size_t count) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    if (count < field->field.size()) throw Error(ErrorKind::InvalidArgument, "buffer too small");
    std::copy(field->field.values().begin(), field->field.values().end(), out);
  });
}

af_status af_field_mean(const af_field* field, double* out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = mass(field->field);
  });
}

af_status af_step(af_field* field, const af_params* params) {
  return guarded([&] {
    require(field, "field");
    field->field = step_imex(field->field, to_params(params));
  });
}

af_status af_advance(af_field* field, const af_params* params, double t_end) {
  return guarded([&] {
    require(field, "field");
    RunOptions opts;
    opts.snapshot_stride = static_cast<std::size_t>(1) << 40;
    opts.keep_snapshots = false;
    opts.k_max = 0;
    Trajectory traj = run(field->field, to_params(params), t_end, opts);
    field->field = std::move(*traj.final_field);
  });
}

af_status af_kappa(const af_params* params, double mean, double c_p, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = kappa(to_params(params), mean, c_p);
  });
}

af_status af_peclet_threshold(const af_params* params, double mean, double c_p, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = peclet_threshold(to_params(params), mean, c_p);
  });
}

af_status af_stationary_residual(const af_field* field, const af_params* params, double* out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = stationary_residual(field->field, to_params(params));
  });
}

int af_run_command(const char* command, const char* config_path, af_write_fn out, af_write_fn err,
                   void* user) {
  if (!command || !config_path) {
    const std::string msg = error_json("InvalidArgument", "command and config path are required");
    if (err) {
      err(msg.data(), msg.size(), user);
    } else {
      std::cerr << msg << '\n';
    }
    return kExitRuntimeError;
  }
  if (!out && !err) return run_command(command, config_path, std::cout, std::cerr);
  CallbackBuf out_buf(out, user), err_buf(err, user);
  std::ostream out_stream(out ? static_cast<std::streambuf*>(&out_buf) : std::cout.rdbuf());
  std::ostream err_stream(err ? static_cast<std::streambuf*>(&err_buf) : std::cerr.rdbuf());
  const int code = run_command(command, config_path, out_stream, err_stream);
  out_stream.flush();
  err_stream.flush();
  return code;
}

}  // extern "C"
