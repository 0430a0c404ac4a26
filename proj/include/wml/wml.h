#ifndef WML_WML_H
#define WML_WML_H

/* C interface to the weighted model manifold toolkit.
 *
 * Every call returns a wml_status. On failure the message is available from
 * wml_last_error() on the calling thread until the next call on that thread.
 * Strings returned through char** are owned by the caller and released with
 * wml_string_free().
 *
 * Computations take a JSON request object and produce a JSON response
 *   {"outcome": "ok" | "inconclusive" | "mismatch",
 *    "results": {...}, "warnings": [...], "runtime": {...}, "artifacts": {...}}
 * where "results" depends only on the inputs and the seed, and "runtime"
 * holds the worker count. Unknown request keys are rejected with
 * WML_E_USAGE. A NULL request means all defaults. */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WML_API __declspec(dllexport)
#else
#define WML_API __attribute__((visibility("default")))
#endif

typedef struct wml_manifold wml_manifold;

typedef enum wml_status {
  WML_OK = 0,
  WML_E_SYNTAX = 1,
  WML_E_UNKNOWN_IDENTIFIER = 2,
  WML_E_DOMAIN = 3,
  WML_E_VALIDATION = 4,
  WML_E_OVERFLOW = 5,
  WML_E_QUADRATURE = 6,
  WML_E_NO_CONVERGENCE = 7,
  WML_E_SHOOTING = 8,
  WML_E_STEP_UNDERFLOW = 9,
  WML_E_UNKNOWN_PRESET = 10,
  WML_E_USAGE = 11,
  WML_E_IO = 12,
  WML_E_NULL_ARGUMENT = 13,
  WML_E_INTERNAL = 14
} wml_status;

WML_API const char* wml_version(void);
WML_API const char* wml_schema_version(void);
WML_API const char* wml_status_name(wml_status status);
WML_API const char* wml_last_error(void);
WML_API void wml_string_free(char* s);

/* Manifolds: catalog presets, `key = value` spec text, or a spec file. */
WML_API wml_status wml_manifold_from_preset(const char* name, wml_manifold** out);
WML_API wml_status wml_manifold_from_spec(const char* text, wml_manifold** out);
WML_API wml_status wml_manifold_from_file(const char* path, wml_manifold** out);
WML_API void wml_manifold_free(wml_manifold* m);
WML_API wml_status wml_manifold_describe(const wml_manifold* m, char** json_out);
WML_API wml_status wml_manifold_dimension(const wml_manifold* m, int* out);
/* Delta_f r at radius r. */
WML_API wml_status wml_manifold_drift(const wml_manifold* m, double r, double* out);
/* Newline-separated preset names. */
WML_API wml_status wml_preset_catalog(char** out);

/* Stochastic completeness and Feller verdicts. Request: {"exponent": n}. */
WML_API wml_status wml_classify(const wml_manifold* m, const char* request_json, char** json_out);

/* Request: {"mode": "ball", "radius": R} | {"mode": "interval", "r_lo": a, "r_hi": b}
 *        | {"mode": "exterior", "radius": R} | {"mode": "ess", "radii": [...]} */
WML_API wml_status wml_spectrum(const wml_manifold* m, const char* request_json, char** json_out);
WML_API wml_status wml_lambda1_ball(const wml_manifold* m, double radius, double* out);

/* Request: {"paths", "t_max", "seed", "dt", "outer", "inner", "r0", "threads", "trace_paths",
 *           "hitting": {"radius", "lambda", "starts": [...]}}; without "hitting" the
 * explosion fraction from r0 is estimated. */
WML_API wml_status wml_simulate(const wml_manifold* m, const char* request_json, char** json_out);

/* Minimal exterior solution. Request: {"lambda", "radius", "r_max"}. */
WML_API wml_status wml_profile(const wml_manifold* m, const char* request_json, char** json_out);

/* Heat mass with truncation doubling. Request: {"r_init", "t", "truncation", "max_doublings"}. */
WML_API wml_status wml_heat(const wml_manifold* m, const char* request_json, char** json_out);

/* Consistency audit of a soliton preset. */
WML_API wml_status wml_audit(const char* soliton_preset, char** json_out);

/* Example tables; "all" runs every example. Outcome "mismatch" when a cell fails. */
WML_API wml_status wml_reproduce(const char* example_id, char** json_out);
/* Newline-separated example ids. */
WML_API wml_status wml_reproduction_ids(char** out);

#ifdef __cplusplus
}
#endif

#endif
