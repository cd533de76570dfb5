/* C interface to libwedgescope.
 *
 * Every function returns a ws_status. On failure the message is available
 * from ws_last_error() on the calling thread until that thread's next call.
 * Strings handed out by the library (char** out parameters) belong to the
 * caller and are released with ws_string_free(). Structured inputs and outputs
 * (configs, reports) cross the boundary as JSON text.
 */
#ifndef WEDGESCOPE_H
#define WEDGESCOPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define WS_API __declspec(dllexport)
#else
#  define WS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
  WS_OK = 0,
  WS_ERR_INVALID_ARGUMENT = 1,
  WS_ERR_DIMENSION_MISMATCH = 2,
  WS_ERR_NUMERICAL = 3,
  WS_ERR_IO = 4,
  WS_ERR_INTERNAL = 5
} ws_status;

WS_API const char* ws_version(void);
WS_API const char* ws_last_error(void);
/* Step / waypoint index attached to the last numerical error, -1 if none. */
WS_API long ws_last_error_step(void);
WS_API void ws_string_free(char* s);

/* ---- toy landscape ---- */

typedef struct ws_landscape ws_landscape;

/* {"D": int, "n": int, "rotation_seed": optional int} */
WS_API ws_status ws_landscape_create(const char* config_json, ws_landscape** out);
WS_API void ws_landscape_destroy(ws_landscape* l);
WS_API ws_status ws_landscape_dim(const ws_landscape* l, size_t* dim, size_t* wedge_dim);
WS_API ws_status ws_landscape_loss(const ws_landscape* l, const double* p, size_t len, double* loss);
WS_API ws_status ws_landscape_grad(const ws_landscape* l, const double* p, size_t len, double* grad);
/* Writes the n kept axes, increasing. axes_cap must be >= n. */
WS_API ws_status ws_landscape_nearest_wedge(const ws_landscape* l, const double* p, size_t len,
                                            int* axes, size_t axes_cap);
WS_API ws_status ws_landscape_short_count(const ws_landscape* l, const double* p, size_t len,
                                          double tol, size_t* count);

/* Minimizes the landscape loss from p0 (optimizer config as JSON, NULL for
 * defaults). The final point is written to p_out; report_json (optional)
 * receives {"initial_loss","final_loss","converged","steps"}. */
WS_API ws_status ws_landscape_minimize(const ws_landscape* l, const double* p0, size_t len,
                                       const char* optimizer_json, double* p_out,
                                       char** report_json);

/* ---- connectors ---- */

typedef struct ws_connector ws_connector;

WS_API ws_status ws_tunnel_build(const ws_landscape* l, const double* a, const double* b,
                                 size_t len, int segments, const char* inner_optimizer_json,
                                 int jobs, ws_connector** out);
WS_API void ws_connector_destroy(ws_connector* c);
WS_API ws_status ws_connector_size(const ws_connector* c, size_t* waypoints, size_t* dim);
WS_API ws_status ws_connector_waypoint(const ws_connector* c, size_t index, double* out, size_t len);
WS_API ws_status ws_connector_loss(const ws_connector* c, size_t index, double* loss);
/* {"max_loss", "endpoint_max_loss", "cosines": {...}} */
WS_API ws_status ws_connector_report(const ws_connector* c, char** report_json);
WS_API ws_status ws_connector_write_csv(const ws_connector* c, const char* path);

/* ---- tiny networks ---- */

typedef struct ws_network ws_network;

/* {"spec": {"layer_sizes": [...], "activation": "tanh"|"relu", "seed": int},
 *  "dataset": {"kind","n","noise","seed"} or {"csv","label_column","split_seed"}} */
WS_API ws_status ws_network_create(const char* config_json, ws_network** out);
WS_API void ws_network_destroy(ws_network* n);
WS_API ws_status ws_network_param_count(const ws_network* n, size_t* count);
WS_API ws_status ws_network_init_params(const ws_network* n, double* out, size_t len);
/* Trains from init_params (train config JSON, NULL for defaults). */
WS_API ws_status ws_network_train(const ws_network* n, const char* train_json, double* params_out,
                                  size_t len, char** report_json);
/* Training-split objective (cross-entropy + l2 * ||W||^2), optional gradient. */
WS_API ws_status ws_network_loss(const ws_network* n, const double* params, size_t len,
                                 double l2_coeff, double* loss, double* grad);
WS_API ws_status ws_network_save_checkpoint(const ws_network* n, const double* params, size_t len,
                                            const char* path);

/* ---- experiments (the CLI subcommands) ---- */

typedef struct ws_run_options {
  const char* output_dir; /* NULL: use the config's output_dir */
  int has_seed;           /* nonzero: `seed` overrides the config's seed */
  uint64_t seed;
  int jobs;               /* <= 0: all available cores */
  int quiet;
} ws_run_options;

/* JSON array of subcommand names. */
WS_API ws_status ws_experiment_names(char** names_json);
/* Runs one subcommand; summary_json receives the one-line JSON summary. */
WS_API ws_status ws_experiment_run(const char* name, const char* config_json,
                                   const ws_run_options* options, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* WEDGESCOPE_H */
