#ifndef ACTIVEFLOW_H
#define ACTIVEFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(AF_BUILDING)
#    define AF_API __declspec(dllexport)
#  else
#    define AF_API __declspec(dllimport)
#  endif
#else
#  define AF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum af_status {
  AF_OK = 0,
  AF_ERR_INVALID_ARGUMENT,
  AF_ERR_ADMISSIBILITY,
  AF_ERR_NUMERICAL_BLOWUP,
  AF_ERR_RADIUS_TOO_LARGE,
  AF_ERR_ZERO_PECLET,
  AF_ERR_WINDOW_TOO_SHORT,
  AF_ERR_NEGATIVE_FIELD,
  AF_ERR_TOO_FEW_SNAPSHOTS,
  AF_ERR_NONPOSITIVE_VALUE,
  AF_ERR_TOO_FEW_POINTS,
  AF_ERR_NOT_CONVERGED,
  AF_ERR_ITERATION_STALL,
  AF_ERR_PARSE,
  AF_ERR_VALIDATION,
  AF_ERR_IO,
  AF_ERR_CONFIG_MISMATCH,
  AF_ERR_INTERNAL
} af_status;

typedef struct af_grid af_grid;
typedef struct af_field af_field;

typedef struct af_params {
  double pe;
  double de;
  double dt;
  int dealias;
} af_params;

/* Message of the last failing call on this thread, "" if none. */
AF_API const char* af_last_error(void);
AF_API const char* af_status_name(af_status status);

/* Transform threads; returns the value in effect. */
AF_API int af_set_threads(int n);

AF_API af_status af_grid_create(int n_x, int n_theta, af_grid** out);
AF_API void af_grid_destroy(af_grid* grid);

/* initial_json uses the "initial" object of the run configuration, e.g.
   {"kind": "single_mode", "mass": 24.8, "amplitude": 0.5, "mode": [1, 0, 0]} */
AF_API af_status af_field_from_initial(const af_grid* grid, const char* initial_json,
                                       af_field** out);
AF_API af_status af_field_from_values(const af_grid* grid, const double* values, size_t count,
                                      af_field** out);
AF_API void af_field_destroy(af_field* field);
AF_API size_t af_field_size(const af_field* field);
AF_API af_status af_field_values(const af_field* field, double* out, size_t count);
AF_API af_status af_field_mean(const af_field* field, double* out);

/* Advances the field in place by one step, or with uniform steps to t_end. */
AF_API af_status af_step(af_field* field, const af_params* params);
AF_API af_status af_advance(af_field* field, const af_params* params, double t_end);

AF_API af_status af_kappa(const af_params* params, double mean, double c_p, double* out);
AF_API af_status af_peclet_threshold(const af_params* params, double mean, double c_p,
                                     double* out);
AF_API af_status af_stationary_residual(const af_field* field, const af_params* params,
                                        double* out);

/* Receives output text. NULL sinks write to stdout and stderr. */
typedef void (*af_write_fn)(const char* text, size_t len, void* user);

/* Runs a CLI subcommand (simulate, verify, decay, stationary, oracle-compare)
   and returns its exit code: 0 ok, 1 verification failure, 2 runtime error. */
AF_API int af_run_command(const char* command, const char* config_path, af_write_fn out,
                          af_write_fn err, void* user);

#ifdef __cplusplus
}
#endif

#endif
