#ifndef CARLEMAN_H
#define CARLEMAN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CRL_API __declspec(dllexport)
#else
#define CRL_API __attribute__((visibility("default")))
#endif

typedef enum crl_status {
  CRL_OK = 0,
  CRL_PARSE_ERROR = 1,
  CRL_SOLVER_ERROR = 2,
  CRL_VERIFY_FAILED = 3,
  CRL_USAGE_ERROR = 4,
  CRL_INTERNAL_ERROR = 5
} crl_status;

typedef struct crl_system crl_system;
typedef struct crl_options crl_options;
typedef struct crl_solution crl_solution;

/* Message of the last failed call on this thread; never NULL. */
CRL_API const char* crl_last_error(void);
/* Stage of the last failure ("parse", "shift", "admissibility", ...). */
CRL_API const char* crl_last_error_stage(void);
CRL_API const char* crl_version(void);

/* Strings returned through char** out parameters are owned by the caller. */
CRL_API void crl_string_free(char* s);

/* mode: "exact" or "float". */
CRL_API crl_status crl_system_parse(const char* text, const char* mode, crl_system** out);
CRL_API void crl_system_free(crl_system* system);
CRL_API crl_status crl_system_render(const crl_system* system, char** out);
CRL_API size_t crl_system_variable_count(const crl_system* system);
CRL_API size_t crl_system_depth(const crl_system* system);

CRL_API crl_status crl_options_new(crl_options** out);
CRL_API void crl_options_free(crl_options* options);
CRL_API crl_status crl_options_set_order(crl_options* options, unsigned order);
/* "auto", "none", or comma-separated values such as "-2" or "1/2, 0". */
CRL_API crl_status crl_options_set_shift(crl_options* options, const char* shift);
/* JSON rows, e.g. "[[1,2],[-3,-5]]"; NULL restores automatic choice. */
CRL_API crl_status crl_options_set_matrix_a(crl_options* options, const char* json);
CRL_API crl_status crl_options_set_max_power(crl_options* options, unsigned max_power);
CRL_API crl_status crl_options_set_tolerance(crl_options* options, double tolerance);
CRL_API crl_status crl_options_set_seed(crl_options* options, uint64_t seed);

CRL_API crl_status crl_solve(const crl_system* system, const crl_options* options, crl_solution** out);
CRL_API void crl_solution_free(crl_solution* solution);
/* format: "text" or "json". */
CRL_API crl_status crl_solution_render(const crl_solution* solution, const char* format, char** out);
CRL_API crl_status crl_solution_from_json(const char* json, crl_solution** out);

/* Report functions fill *out even when they return CRL_VERIFY_FAILED. */
CRL_API crl_status crl_verify_report(const crl_system* system, const crl_solution* solution,
                                     const crl_options* options, const char* format, char** out);
CRL_API crl_status crl_matrix_report(const crl_system* system, const crl_options* options, const char* format,
                                     char** out);
CRL_API crl_status crl_transform_report(const crl_system* system, const crl_options* options, const char* format,
                                        char** out);
/* history: comma-separated u_0 .. u_{n-1}, k values per step. */
CRL_API crl_status crl_eval_report(const crl_system* system, const crl_solution* solution, unsigned step,
                                   const char* history, const char* format, char** out);

#ifdef __cplusplus
}
#endif

#endif
