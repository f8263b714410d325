#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "graphmem/graphmem.h"

static int failures = 0;

#define CHECK(cond)                                                    \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: check failed: %s (%s)\n", __FILE__,      \
              __LINE__, #cond, gm_last_error());                       \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const char *ethanol =
    "ethanol\n  test\n\n"
    "  3  2  0  0  0  0  0  0  0  0999 V2000\n"
    "    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n"
    "    1.5000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n"
    "    2.0000    1.0000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0\n"
    "  1  2  1  0\n"
    "  2  3  1  0\n"
    "M  END\n";

static void write_file(const char *path, const char *text) {
  FILE *f = fopen(path, "w");
  fputs(text, f);
  fclose(f);
}

static void quiet(const char *line, void *user) {
  (void)line;
  ++*(int *)user;
}

int main(void) {
  char dir[] = "/tmp/graphmem_capi_XXXXXX";
  char path[512], out[256], ckpt[512];
  if (!mkdtemp(dir))
    return 1;

  CHECK(strlen(gm_version()) > 0);
  CHECK(strcmp(gm_status_name(GM_ERR_FORMAT), gm_status_name(GM_OK)) != 0);

  gm_molecule *mol = NULL;
  CHECK(gm_molecule_parse(ethanol, NULL, &mol) == GM_OK);
  CHECK(gm_molecule_atom_count(mol) == 3);
  CHECK(gm_molecule_bond_count(mol) == 2);
  gm_molecule *bad = NULL;
  CHECK(gm_molecule_parse("not a molfile", NULL, &bad) == GM_ERR_DATA);
  CHECK(bad == NULL);
  CHECK(strlen(gm_last_error()) > 0);

  gm_config *cfg = NULL;
  CHECK(gm_config_new(&cfg) == GM_OK);
  CHECK(gm_config_set(cfg, "hops", "2") == GM_OK);
  CHECK(strcmp(gm_config_get(cfg, "hops"), "2") == 0);
  CHECK(gm_config_get(cfg, "missing") == NULL);

  snprintf(path, sizeof path, "%s/data", dir);
  mkdir(path, 0755);
  snprintf(path, sizeof path, "%s/data/molecules.sdf", dir);
  FILE *sdf = fopen(path, "w");
  snprintf(path, sizeof path, "%s/data/labels.csv", dir);
  FILE *csv = fopen(path, "w");
  fputs("id,label\n", csv);
  for (int i = 0; i < 40; ++i) {
    const char *tail = i % 2 ? "O" : "N";
    fprintf(sdf,
            "m%d\n\n\n  3  2  0  0  0  0  0  0  0  0999 V2000\n"
            "    0.0000    0.0000    0.0000 C   0  0\n"
            "    0.0000    0.0000    0.0000 C   0  0\n"
            "    0.0000    0.0000    0.0000 %s   0  0\n"
            "  1  2  1  0\n  2  3  %d  0\nM  END\n$$$$\n",
            i, tail, 1 + i % 3 / 2);
    fprintf(csv, "m%d,%d\n", i, i % 2);
  }
  fclose(sdf);
  fclose(csv);

  snprintf(out, sizeof out, "%s/run", dir);
  snprintf(path, sizeof path, "%s/data", dir);
  gm_config_set(cfg, "tasks", "oxy");
  gm_config_set(cfg, "task.oxy", path);
  gm_config_set(cfg, "memory_size", "8");
  gm_config_set(cfg, "controller_size", "8");
  gm_config_set(cfg, "max_epochs", "2");
  int lines = 0;
  CHECK(gm_train(cfg, out, NULL, quiet, &lines) == GM_OK);
  CHECK(lines > 0);

  snprintf(ckpt, sizeof ckpt, "%s/model-oxy.ckpt", out);
  gm_model *model = NULL;
  CHECK(gm_model_load(ckpt, &model) == GM_OK);
  CHECK(gm_model_task_count(model) == 1);
  double p = -1.0;
  CHECK(gm_model_predict(model, mol, 0, &p) == GM_OK);
  CHECK(p > 0.0 && p < 1.0);
  CHECK(gm_model_predict(model, mol, 3, &p) != GM_OK);
  gm_molecule *narrow = NULL;
  CHECK(gm_molecule_parse(ethanol, "C,O", &narrow) == GM_OK);
  CHECK(gm_model_predict(model, narrow, 0, &p) == GM_ERR_DATA);

  snprintf(path, sizeof path, "%s/copy.ckpt", dir);
  CHECK(gm_model_save(model, path) == GM_OK);
  gm_model *copy = NULL;
  double q = -1.0;
  CHECK(gm_model_load(path, &copy) == GM_OK);
  gm_model_predict(model, mol, 0, &p);
  CHECK(gm_model_predict(copy, mol, 0, &q) == GM_OK);
  CHECK(p == q);
  gm_model_free(copy);

  snprintf(path, sizeof path, "%s/eval.json", dir);
  CHECK(gm_eval(cfg, ckpt, "test", path) == GM_OK);
  CHECK(gm_eval(cfg, ckpt, "nonsense", path) != GM_OK);

  snprintf(path, sizeof path, "%s/missing.ckpt", dir);
  gm_model *none = NULL;
  CHECK(gm_model_load(path, &none) != GM_OK);
  snprintf(path, sizeof path, "%s/garbage.ckpt", dir);
  write_file(path, "garbage");
  CHECK(gm_model_load(path, &none) == GM_ERR_FORMAT);

  CHECK(gm_config_set(cfg, "hops", "0") == GM_OK);
  CHECK(gm_train(cfg, out, NULL, NULL, NULL) == GM_ERR_CONFIG);

  double err = 1.0;
  int passed = 0;
  CHECK(gm_gradcheck(3, 2, 1e-5, 1e-4, &err, &passed) == GM_OK);
  CHECK(passed == 1 && err <= 1e-4);

  gm_molecule_free(narrow);
  gm_model_free(model);
  gm_config_free(cfg);
  gm_molecule_free(mol);
  gm_molecule_free(NULL);
  gm_model_free(NULL);
  gm_config_free(NULL);

  if (failures == 0)
    printf("capi_test: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
