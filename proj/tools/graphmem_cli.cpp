// Command-line front end. Talks to the library only through graphmem.h.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphmem/graphmem.h"

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_dir = ".";
  int workers = 1;
  bool workers_given = false;
  std::vector<std::string> overrides;
};

int report(gm_status s) {
  if (s != GM_OK)
    std::fprintf(stderr, "graphmem: %s: %s\n", gm_status_name(s), gm_last_error());
  return static_cast<int>(s);
}

void print_line(const char *line, void *) {
  std::fprintf(stderr, "%s\n", line);
}

// Config file (when given) plus flag overrides; flags win.
gm_status open_config(const Globals &g, gm_config **out) {
  gm_status s = g.config.empty() ? gm_config_new(out) : gm_config_load(g.config.c_str(), out);
  if (s != GM_OK)
    return s;
  for (const auto &kv: g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      gm_config_free(*out);
      *out = nullptr;
      std::fprintf(stderr, "graphmem: --set expects key=value, got '%s'\n", kv.c_str());
      return GM_ERR_CONFIG;
    }
    gm_config_set(*out, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  if (g.seed_given)
    gm_config_set(*out, "seed", std::to_string(g.seed).c_str());
  if (g.workers_given)
    gm_config_set(*out, "workers", std::to_string(g.workers).c_str());
  return GM_OK;
}

std::string in_out_dir(const Globals &g, const std::string &explicit_path,
                       const std::string &name) {
  if (!explicit_path.empty())
    return explicit_path;
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"graphmem: graph memory networks for molecular activity prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gm_version());

  Globals g;
  app.add_option("--config", g.config, "key=value configuration file");
  app.add_option("--seed", g.seed, "run seed")->each([&](const std::string &) { g.seed_given = true; });
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--workers", g.workers, "threads for per-example passes")
      ->check(CLI::Range(1, 256))
      ->each([&](const std::string &) { g.workers_given = true; });
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  auto *train = app.add_subcommand("train", "train models and write metrics, checkpoints, log and manifest");
  std::string mode, task, manifest;
  train->add_option("--mode", mode, "single or multi");
  train->add_option("--task", task, "train only this roster entry");
  train->add_option("--manifest", manifest, "re-run the training recorded in a manifest");

  auto *eval = app.add_subcommand("eval", "metrics of a checkpoint on a data split");
  std::string checkpoint, split = "test", output;
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split, "train, valid or test");
  eval->add_option("--output", output, "metrics JSON path");

  auto *fprint = app.add_subcommand("fingerprint", "circular fingerprints of an SDF file as id,hex CSV");
  std::string input, vocab;
  int bits = 1024, radius = 2;
  fprint->add_option("--input", input, "SDF or MOL file")->required();
  fprint->add_option("--bits", bits, "fingerprint length (power of two)");
  fprint->add_option("--radius", radius, "circular radius");
  fprint->add_option("--vocab", vocab, "comma-separated element list");
  fprint->add_option("--output", output, "CSV path");

  auto *grad = app.add_subcommand("gradcheck", "compare exact and finite-difference gradients");
  int graphs = 5;
  double eps = 1e-5, threshold = 1e-4;
  grad->add_option("--graphs", graphs, "random graphs to check")->check(CLI::Range(1, 1000));
  grad->add_option("--eps", eps, "central-difference step");
  grad->add_option("--threshold", threshold, "maximum relative error");

  auto *dump = app.add_subcommand("dump-attention", "per-hop attention weights as JSON lines");
  dump->add_option("--checkpoint", checkpoint)->required();
  dump->add_option("--split", split, "train, valid or test");
  dump->add_option("--output", output, "JSON lines path");

  auto *synth = app.add_subcommand("synth", "write a synthetic motif dataset");
  std::string spec;
  synth->add_option("--spec", spec, "synthetic spec file")->required();

  for (auto *sub: {train, eval, fprint, grad, dump, synth})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : GM_ERR_CONFIG;
  }

  if (*grad) {
    double max_error = 0.0;
    int passed = 0;
    if (auto s = gm_gradcheck(g.seed, graphs, eps, threshold, &max_error, &passed))
      return report(s);
    std::printf("max relative error %.3e (threshold %.1e): %s\n", max_error, threshold,
                passed ? "pass" : "FAIL");
    return passed ? 0 : GM_ERR_NUMERIC;
  }
  if (*synth) {
    std::filesystem::create_directories(g.out_dir);
    return report(gm_synth(spec.c_str(), g.seed, g.out_dir.c_str()));
  }
  if (*train && !manifest.empty())
    return report(gm_train_from_manifest(manifest.c_str(), g.out_dir.c_str(), print_line, nullptr));

  gm_config *cfg = nullptr;
  if (auto s = open_config(g, &cfg))
    return report(s);
  gm_status s = GM_OK;
  if (*train) {
    if (!mode.empty())
      gm_config_set(cfg, "mode", mode.c_str());
    s = gm_train(cfg, g.out_dir.c_str(), task.c_str(), print_line, nullptr);
    if (s == GM_OK)
      std::printf("%s\n", (std::filesystem::path(g.out_dir) / "metrics.json").c_str());
  } else if (*eval) {
    const auto path = in_out_dir(g, output, "eval-" + split + ".json");
    s = gm_eval(cfg, checkpoint.c_str(), split.c_str(), path.c_str());
    if (s == GM_OK)
      std::printf("%s\n", path.c_str());
  } else if (*dump) {
    const auto path = in_out_dir(g, output, "attention.jsonl");
    s = gm_dump_attention(cfg, checkpoint.c_str(), split.c_str(), path.c_str());
    if (s == GM_OK)
      std::printf("%s\n", path.c_str());
  } else if (*fprint) {
    if (vocab.empty())
      if (const char *v = gm_config_get(cfg, "vocab"))
        vocab = v;
    const auto path = in_out_dir(g, output, "fingerprints.csv");
    s = gm_fingerprint_sdf(input.c_str(), vocab.empty() ? nullptr : vocab.c_str(), radius,
                           bits, path.c_str());
    if (s == GM_OK)
      std::printf("%s\n", path.c_str());
  }
  gm_config_free(cfg);
  return report(s);
}
