#ifndef CHOQUARD_H
#define CHOQUARD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CHQ_API __declspec(dllexport)
#else
#define CHQ_API __attribute__((visibility("default")))
#endif

typedef enum chq_status {
  CHQ_OK = 0,
  CHQ_ERR_INVALID_ARGUMENT = 1,
  CHQ_ERR_DOMAIN = 2,
  CHQ_ERR_IO = 3,
  CHQ_ERR_FORMAT = 4,
  CHQ_ERR_CONVERGENCE = 5,
  CHQ_ERR_SUPPORT = 6,
  CHQ_ERR_RUNTIME = 7,
  CHQ_ERR_NULL = 8
} chq_status;

typedef struct chq_config chq_config;
typedef struct chq_field chq_field;

typedef struct chq_functionals {
  double E, Q, S_omega, I_omega, P, F_mu, grad_sq, pot_term, x_norm_sq;
} chq_functionals;

CHQ_API const char* chq_version(void);
CHQ_API const char* chq_status_name(chq_status s);
/* Message of the last failed call on this thread, "" if none. */
CHQ_API const char* chq_last_error(void);

CHQ_API chq_status chq_config_create(chq_config** out);
CHQ_API void chq_config_destroy(chq_config* c);
CHQ_API chq_status chq_config_load_file(chq_config* c, const char* path);
CHQ_API chq_status chq_config_load_text(chq_config* c, const char* text, const char* origin);
/* location names the source in error messages, e.g. "--mu". */
CHQ_API chq_status chq_config_set(chq_config* c, const char* key, const char* value, const char* location);
/* Parses and range-checks every value set so far. */
CHQ_API chq_status chq_config_validate(const chq_config* c);
/* Canonical text; *needed gets the size including the terminator. */
CHQ_API chq_status chq_config_canonical(const chq_config* c, char* buf, size_t size, size_t* needed);
/* 16 hex digits plus terminator. */
CHQ_API chq_status chq_config_hash(const chq_config* c, char out[17]);
/* Number of config keys and the i-th key name. */
CHQ_API size_t chq_config_key_count(void);
CHQ_API const char* chq_config_key(size_t i);

/* Runs the configured command. *exit_code is 0 (success), 1 (verdict fail)
   or 2 (runtime error); diagnostics go to stderr. */
CHQ_API chq_status chq_run(const chq_config* c, int* exit_code);

/* data holds n^3 (re, im) pairs, x fastest; NULL gives zeros. L is the box half width. */
CHQ_API chq_status chq_field_create(uint64_t n, double L, const double* data, chq_field** out);
CHQ_API void chq_field_destroy(chq_field* f);
CHQ_API chq_status chq_field_read(const char* path, chq_field** out);
CHQ_API chq_status chq_field_write(const chq_field* f, const char* path);
CHQ_API chq_status chq_field_shape(const chq_field* f, uint64_t* n, double* L);
/* count is the number of doubles in data, at least 2 n^3. */
CHQ_API chq_status chq_field_copy_data(const chq_field* f, double* data, size_t count);
/* Functionals of f under the potential and (mu, p, omega) of c. */
CHQ_API chq_status chq_field_functionals(const chq_field* f, const chq_config* c, chq_functionals* out);

/* Ground state for the grid, potential and parameters of c. */
CHQ_API chq_status chq_ground_state(const chq_config* c, chq_field** phi, double* residual, int* converged);

#ifdef __cplusplus
}
#endif

#endif
