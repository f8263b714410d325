#ifndef GRAPHMEM_GRAPHMEM_H
#define GRAPHMEM_GRAPHMEM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GM_API __declspec(dllexport)
#elif defined(__GNUC__)
#define GM_API __attribute__((visibility("default")))
#else
#define GM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum gm_status {
  GM_OK = 0,
  GM_ERR_USAGE = 1,
  GM_ERR_CONFIG = 2,
  GM_ERR_DATA = 3,
  GM_ERR_NUMERIC = 4,
  GM_ERR_FORMAT = 5,
  GM_ERR_INTERNAL = 6
} gm_status;

typedef struct gm_config gm_config;
typedef struct gm_model gm_model;
typedef struct gm_molecule gm_molecule;

/* Called with one line of training progress (no trailing newline). */
typedef void (*gm_log_fn)(const char *line, void *user);

GM_API const char *gm_version(void);
GM_API const char *gm_status_name(gm_status status);
/* Message of the last failed call on this thread; "" when none. */
GM_API const char *gm_last_error(void);

/* Configuration: flat key=value text. Later assignments win. */
GM_API gm_status gm_config_new(gm_config **out);
GM_API gm_status gm_config_load(const char *path, gm_config **out);
GM_API gm_status gm_config_set(gm_config *cfg, const char *key, const char *value);
/* Value of key, or NULL when unset. Valid until the next change to cfg. */
GM_API const char *gm_config_get(const gm_config *cfg, const char *key);
GM_API void gm_config_free(gm_config *cfg);

/* Writes checkpoints, metrics.json, train.log and manifest.json to out_dir.
 * only_task may be NULL or "" for the whole roster. */
GM_API gm_status gm_train(const gm_config *cfg, const char *out_dir,
                          const char *only_task, gm_log_fn log, void *user);
GM_API gm_status gm_train_from_manifest(const char *manifest_path,
                                        const char *out_dir, gm_log_fn log,
                                        void *user);
/* Writes metrics JSON for split "train", "valid" or "test" to out_path. */
GM_API gm_status gm_eval(const gm_config *cfg, const char *checkpoint,
                         const char *split, const char *out_path);
GM_API gm_status gm_dump_attention(const gm_config *cfg, const char *checkpoint,
                                   const char *split, const char *out_path);
/* vocab: comma-separated element list, or NULL for the default. */
GM_API gm_status gm_fingerprint_sdf(const char *sdf_path, const char *vocab,
                                    int radius, int nbits, const char *out_path);
GM_API gm_status gm_gradcheck(uint64_t seed, int graphs, double eps,
                              double threshold, double *max_error, int *passed);
GM_API gm_status gm_synth(const char *spec_path, uint64_t seed,
                          const char *out_dir);

/* Molecules parsed from MOL V2000 text and featurized with vocab. */
GM_API gm_status gm_molecule_parse(const char *molfile_text, const char *vocab,
                                   gm_molecule **out);
GM_API int gm_molecule_atom_count(const gm_molecule *mol);
GM_API int gm_molecule_bond_count(const gm_molecule *mol);
GM_API void gm_molecule_free(gm_molecule *mol);

GM_API gm_status gm_model_load(const char *checkpoint, gm_model **out);
GM_API int gm_model_task_count(const gm_model *model);
/* Activity probability of mol for task (0-based roster position). */
GM_API gm_status gm_model_predict(const gm_model *model, const gm_molecule *mol,
                                  int task, double *probability);
GM_API gm_status gm_model_save(const gm_model *model, const char *path);
GM_API void gm_model_free(gm_model *model);

#ifdef __cplusplus
}
#endif

#endif
