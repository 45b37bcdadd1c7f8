#ifndef GAMMALAB_GAMMALAB_H
#define GAMMALAB_GAMMALAB_H

#include <stddef.h>

#if defined(GAMMALAB_BUILDING)
#define GL_API __attribute__((visibility("default")))
#else
#define GL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
    GL_OK = 0,
    GL_INVALID_ARGUMENT = 1,
    GL_DOMAIN = 2,
    GL_INFEASIBLE = 3,
    GL_GUARD = 4,
    GL_CONTRACT = 5,
    GL_IO = 6,
    GL_INTERNAL = 7
} gl_status;

typedef struct gl_sampled gl_sampled;
typedef struct gl_envelope gl_envelope;
typedef struct gl_measure gl_measure;
typedef struct gl_experiment gl_experiment;

GL_API const char* gl_version(void);
/* Message of the last failed call on this thread, "" if none. */
GL_API const char* gl_last_error(void);

/* Tabulated functions */
GL_API gl_status gl_sampled_builtin(const char* name, double tmax, size_t samples, gl_sampled** out);
GL_API gl_status gl_sampled_from_csv(const char* path, gl_sampled** out);
GL_API gl_status gl_sampled_from_values(double tmax, const double* values, size_t count, gl_sampled** out);
GL_API gl_status gl_sampled_eval(const gl_sampled* f, double t, double* out);
GL_API size_t gl_sampled_size(const gl_sampled* f);
GL_API void gl_sampled_free(gl_sampled* f);

/* Convex and convex-subadditive envelopes */
GL_API gl_status gl_envelope_compute(const gl_sampled* f, gl_envelope** out);
GL_API double gl_envelope_t0(const gl_envelope* env);
GL_API double gl_envelope_theta(const gl_envelope* env);
GL_API int gl_envelope_t0_beyond_tmax(const gl_envelope* env);
GL_API gl_status gl_envelope_eval(const gl_envelope* env, double t, double* convex, double* convex_subadditive);
GL_API gl_status gl_envelope_write_csv(const gl_envelope* env, const char* path);
GL_API void gl_envelope_free(gl_envelope* env);

/* Grid measures on (0,1)^dim */
GL_API gl_status gl_measure_create(int dim, int n, gl_measure** out);
GL_API gl_status gl_measure_set_weight(gl_measure* mu, size_t cell, double weight);
GL_API gl_status gl_measure_add_atom(gl_measure* mu, double x, double y, double mass);
GL_API double gl_measure_total(const gl_measure* mu);
GL_API gl_status gl_measure_weakstar_distance(const gl_measure* a, const gl_measure* b, double* out);
GL_API gl_status gl_measure_read_csv(const char* path, gl_measure** out);
GL_API gl_status gl_measure_write_csv(const gl_measure* mu, const char* path);
GL_API void gl_measure_free(gl_measure* mu);

/* Experiments: envelope, measures, wriggle, mm, nonlocal, recover, sandwich, minimize */
GL_API gl_status gl_experiment_create(const char* subcommand, gl_experiment** out);
GL_API gl_status gl_experiment_set(gl_experiment* exp, const char* key, const char* value);
GL_API gl_status gl_experiment_load_config(gl_experiment* exp, const char* path);
/* Writes outputs and manifest.json into out_dir; exit_code receives 0, 1 or 2. */
GL_API gl_status gl_experiment_run(gl_experiment* exp, const char* out_dir, int* exit_code);
GL_API const char* gl_experiment_message(const gl_experiment* exp);
GL_API void gl_experiment_free(gl_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
