#include "graphmem/graphmem.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "common/config.hpp"
#include "common/error.hpp"
#include "experiment/runs.hpp"
#include "graphmem/model.hpp"
#include "molgraph/featurize.hpp"
#include "molgraph/molfile.hpp"
#include "training/trainer.hpp"

using namespace graphmem;

struct gm_config {
  KeyValueConfig cfg;
  std::string base_dir;
  std::string scratch;
};

struct gm_molecule {
  mol::MolecularGraph graph;
};

struct gm_model {
  num::Checkpoint ckpt;
  model::ModelConfig config;
  int hops = 0;
  train::QueryMode query = train::QueryMode::kConstant;
};

namespace {

thread_local std::string last_error;

gm_status fail(gm_status s, const std::string &msg) {
  last_error = msg;
  return s;
}

template <class F>
gm_status guarded(F &&f) {
  try {
    last_error.clear();
    f();
    return GM_OK;
  } catch (const Error &e) {
    return fail(static_cast<gm_status>(e.kind()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(GM_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error &e) {
    return fail(GM_ERR_DATA, e.what());
  } catch (const std::exception &e) {
    return fail(GM_ERR_INTERNAL, e.what());
  }
}

void require(const void *p, const char *what) {
  if (!p)
    throw Error(ErrorKind::kUsage, std::string(what) + " must not be NULL");
}

exp::Settings settings_of(const gm_config *cfg) {
  require(cfg, "config");
  return exp::Settings::from_config(cfg->cfg, cfg->base_dir);
}

exp::Logger logger(gm_log_fn fn, void *user) {
  if (!fn)
    return {};
  return [fn, user](const std::string &line) { fn(line.c_str(), user); };
}

void write_text(const char *path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw DataError(std::string("cannot write '") + path + "'");
}

} // namespace

extern "C" {

const char *gm_version(void) { return exp::kVersion; }

const char *gm_status_name(gm_status status) {
  switch (status) {
  case GM_OK: return "ok";
  case GM_ERR_USAGE: return "usage error";
  case GM_ERR_CONFIG: return "config error";
  case GM_ERR_DATA: return "data error";
  case GM_ERR_NUMERIC: return "numeric error";
  case GM_ERR_FORMAT: return "format error";
  case GM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *gm_last_error(void) { return last_error.c_str(); }

gm_status gm_config_new(gm_config **out) {
  return guarded([&] {
    require(out, "out");
    *out = new gm_config{};
  });
}

gm_status gm_config_load(const char *path, gm_config **out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto *c = new gm_config{};
    try {
      c->cfg = KeyValueConfig::load(path);
    } catch (...) {
      delete c;
      throw;
    }
    c->base_dir = std::filesystem::path(path).parent_path().string();
    *out = c;
  });
}

gm_status gm_config_set(gm_config *cfg, const char *key, const char *value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

const char *gm_config_get(const gm_config *cfg, const char *key) {
  if (!cfg || !key)
    return nullptr;
  auto v = cfg->cfg.get(key);
  if (!v)
    return nullptr;
  auto *self = const_cast<gm_config *>(cfg);
  self->scratch = *v;
  return self->scratch.c_str();
}

void gm_config_free(gm_config *cfg) { delete cfg; }

gm_status gm_train(const gm_config *cfg, const char *out_dir,
                   const char *only_task, gm_log_fn log, void *user) {
  return guarded([&] {
    require(out_dir, "out_dir");
    exp::run_train(settings_of(cfg), out_dir, only_task ? only_task : "",
                   logger(log, user));
  });
}

gm_status gm_train_from_manifest(const char *manifest_path, const char *out_dir,
                                 gm_log_fn log, void *user) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    exp::rerun_manifest(manifest_path, out_dir, logger(log, user));
  });
}

gm_status gm_eval(const gm_config *cfg, const char *checkpoint, const char *split,
                  const char *out_path) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out_path, "out_path");
    const auto j = exp::run_eval(settings_of(cfg), checkpoint, split ? split : "test");
    write_text(out_path, j.dump(2) + "\n");
  });
}

gm_status gm_dump_attention(const gm_config *cfg, const char *checkpoint,
                            const char *split, const char *out_path) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out_path, "out_path");
    exp::run_dump_attention(settings_of(cfg), checkpoint, split ? split : "test",
                            out_path);
  });
}

gm_status gm_fingerprint_sdf(const char *sdf_path, const char *vocab, int radius,
                             int nbits, const char *out_path) {
  return guarded([&] {
    require(sdf_path, "sdf_path");
    require(out_path, "out_path");
    const auto v = vocab && *vocab ? mol::ElementVocabulary::parse(vocab)
                                   : mol::ElementVocabulary::organic();
    exp::run_fingerprint(sdf_path, v, radius, nbits, out_path);
  });
}

gm_status gm_gradcheck(uint64_t seed, int graphs, double eps, double threshold,
                       double *max_error, int *passed) {
  return guarded([&] {
    require(max_error, "max_error");
    require(passed, "passed");
    const auto r = exp::run_gradcheck(seed, graphs, eps, threshold);
    *max_error = r.max_error;
    *passed = r.passed ? 1 : 0;
  });
}

gm_status gm_synth(const char *spec_path, uint64_t seed, const char *out_dir) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out_dir, "out_dir");
    exp::run_synth(spec_path, seed, out_dir);
  });
}

gm_status gm_molecule_parse(const char *molfile_text, const char *vocab,
                            gm_molecule **out) {
  return guarded([&] {
    require(molfile_text, "molfile_text");
    require(out, "out");
    const auto v = vocab && *vocab ? mol::ElementVocabulary::parse(vocab)
                                   : mol::ElementVocabulary::organic();
    *out = new gm_molecule{mol::featurize(mol::parse_molfile(molfile_text), v)};
  });
}

int gm_molecule_atom_count(const gm_molecule *mol) {
  return mol ? mol->graph.node_count() : -1;
}

int gm_molecule_bond_count(const gm_molecule *mol) {
  return mol ? mol->graph.edge_count() : -1;
}

void gm_molecule_free(gm_molecule *mol) { delete mol; }

gm_status gm_model_load(const char *checkpoint, gm_model **out) {
  return guarded([&] {
    require(checkpoint, "checkpoint");
    require(out, "out");
    auto m = std::make_unique<gm_model>();
    m->ckpt = num::load_checkpoint(checkpoint);
    m->config = model::ModelConfig::from_metadata(m->ckpt.metadata);
    const auto hops = m->ckpt.metadata.find("run.hops");
    const auto query = m->ckpt.metadata.find("run.query");
    if (hops == m->ckpt.metadata.end() || query == m->ckpt.metadata.end())
      throw FormatError("checkpoint lacks run.hops or run.query");
    try {
      m->hops = std::stoi(hops->second);
    } catch (const std::logic_error &) {
      throw FormatError("checkpoint: bad run.hops '" + hops->second + "'");
    }
    if (query->second == "one_hot")
      m->query = train::QueryMode::kOneHot;
    else if (query->second != "constant")
      throw FormatError("checkpoint: unknown query mode '" + query->second + "'");
    *out = m.release();
  });
}

namespace {

int model_task_count(const gm_model &model) {
  const auto it = model.ckpt.metadata.find("run.tasks");
  if (it == model.ckpt.metadata.end() || it->second.empty())
    return model.query == graphmem::train::QueryMode::kOneHot ? model.config.query_dim : 1;
  return static_cast<int>(std::count(it->second.begin(), it->second.end(), ',')) + 1;
}

} // namespace

int gm_model_task_count(const gm_model *model) {
  if (!model)
    return -1;
  return model_task_count(*model);
}

gm_status gm_model_predict(const gm_model *model, const gm_molecule *mol,
                           int task, double *probability) {
  return guarded([&] {
    require(model, "model");
    require(mol, "molecule");
    require(probability, "probability");
    if (mol->graph.feature_dim() != model->config.input_dim)
      throw DataError("molecule has feature width "
                      + std::to_string(mol->graph.feature_dim()) + ", model expects "
                      + std::to_string(model->config.input_dim));
    if (task < 0 || task >= model_task_count(*model))
      throw Error(ErrorKind::kUsage, "task " + std::to_string(task) + " outside the model's "
                       + std::to_string(model_task_count(*model)) + " tasks");
    mol::LabeledExample ex{nullptr, task, 0, ""};
    const auto q = train::query_for(ex, model->query, model->config.query_dim);
    *probability = model::forward(model->config, model->ckpt.params, mol->graph, q,
                                  model->hops)
                       .probability;
  });
}

gm_status gm_model_save(const gm_model *model, const char *path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    num::save_checkpoint(path, model->ckpt);
  });
}

void gm_model_free(gm_model *model) { delete model; }

} // extern "C"
