#include "experiment/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/fnv.hpp"
#include "common/rng.hpp"
#include "molgraph/molfile.hpp"
#include "molgraph/synthetic.hpp"

namespace fs = std::filesystem;

namespace graphmem::exp {

std::uint64_t derive_seed(std::uint64_t seed, const std::string &tag) {
  Fnv1a64 h;
  h.update_u64(seed);
  h.update(tag);
  return h.digest();
}

std::string file_checksum(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  Fnv1a64 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h.digest()));
  return hex;
}

KeyValueConfig default_config() {
  KeyValueConfig c;
  c.set("hops", "10");
  c.set("memory_size", "32");
  c.set("controller_size", "32");
  c.set("dropout", "0");
  c.set("lr", "0.001");
  c.set("beta1", "0.9");
  c.set("beta2", "0.999");
  c.set("epsilon", "1e-08");
  c.set("batch_size", "32");
  c.set("max_epochs", "100");
  c.set("patience", "10");
  c.set("seed", "1");
  c.set("workers", "1");
  c.set("mode", "single");
  c.set("tasks", "");
  c.set("vocab", mol::ElementVocabulary::organic().to_string());
  c.set("embed", "learned");
  c.set("neighbor_weights", "uniform");
  c.set("balance", "false");
  c.set("fp_radius", std::to_string(fp::kDefaultRadius));
  c.set("fp_bits", std::to_string(fp::kDefaultBits));
  return c;
}

namespace {

int int_in(const KeyValueConfig &c, const std::string &key, long long lo,
           long long hi) {
  const long long v = c.get_int(key, 0);
  if (v < lo || v > hi)
    throw ConfigError(key + " must be in [" + std::to_string(lo) + ", "
                      + std::to_string(hi) + "], got " + std::to_string(v));
  return static_cast<int>(v);
}

} // namespace

Settings Settings::from_config(const KeyValueConfig &cfg,
                               const std::string &base_dir) {
  KeyValueConfig r = default_config();
  const auto defaults = r;
  for (const auto &[k, v]: cfg.entries()) {
    if (!defaults.contains(k) && k.rfind("task.", 0) != 0)
      throw ConfigError("unknown config key '" + k + "'");
    r.set(k, v);
  }

  Settings s;
  auto &t = s.train;
  t.hops = int_in(r, "hops", 1, 1000);
  t.memory_size = int_in(r, "memory_size", 1, 1 << 16);
  t.controller_size = int_in(r, "controller_size", 1, 1 << 16);
  t.dropout = r.get_double("dropout", 0.0);
  t.adam.step_size = r.get_double("lr", 1e-3);
  t.adam.beta1 = r.get_double("beta1", 0.9);
  t.adam.beta2 = r.get_double("beta2", 0.999);
  t.adam.epsilon = r.get_double("epsilon", 1e-8);
  t.batch_size = int_in(r, "batch_size", 1, 1 << 20);
  t.max_epochs = int_in(r, "max_epochs", 1, 1 << 20);
  t.patience = int_in(r, "patience", 1, 1 << 20);
  const long long seed = r.get_int("seed", 1);
  if (seed < 0)
    throw ConfigError("seed must be >= 0");
  t.seed = static_cast<std::uint64_t>(seed);
  t.workers = int_in(r, "workers", 1, 256);

  const auto mode = r.get_string("mode", "single");
  if (mode != "single" && mode != "multi")
    throw ConfigError("mode must be 'single' or 'multi', got '" + mode + "'");
  s.multi = mode == "multi";
  t.query = s.multi ? train::QueryMode::kOneHot : train::QueryMode::kConstant;

  const auto embed = r.get_string("embed", "learned");
  if (embed == "learned")
    t.embed = model::EmbedMode::kLearned;
  else if (embed == "raw")
    t.embed = model::EmbedMode::kRaw;
  else
    throw ConfigError("embed must be 'learned' or 'raw', got '" + embed + "'");

  const auto nw = r.get_string("neighbor_weights", "uniform");
  if (nw == "uniform")
    t.neighbor_weights = model::NeighborWeights::kUniform;
  else if (nw == "learned")
    t.neighbor_weights = model::NeighborWeights::kLearned;
  else
    throw ConfigError("neighbor_weights must be 'uniform' or 'learned', got '"
                      + nw + "'");
  t.validate();

  s.vocab = mol::ElementVocabulary::parse(r.get_string("vocab", ""));
  s.balance = r.get_bool("balance", false);
  s.fp_radius = int_in(r, "fp_radius", 0, 16);
  s.fp_bits = int_in(r, "fp_bits", 2, 1 << 24);

  for (const auto &name: split(r.get_string("tasks", ""), ',')) {
    const auto n = trim(name);
    if (n.empty())
      continue;
    const auto path = r.get("task." + n);
    if (!path)
      throw ConfigError("task '" + n + "' listed in tasks but task." + n
                        + " is not set");
    fs::path p(*path);
    if (p.is_relative() && !base_dir.empty())
      p = fs::path(base_dir) / p;
    for (const auto &other: s.tasks)
      if (other.name == n)
        throw ConfigError("task '" + n + "' listed twice");
    s.tasks.push_back({n, fs::absolute(p).lexically_normal().string()});
    r.set("task." + n, s.tasks.back().path);
  }
  s.resolved = std::move(r);
  return s;
}

namespace {

int parse_label(const std::string &raw) {
  std::string v = trim(raw);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "1" || v == "active" || v == "true")
    return 1;
  if (v == "0" || v == "inactive" || v == "false")
    return 0;
  return -1;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::vector<int> read_labels(const std::string &path,
                             const std::vector<mol::MolecularGraph> &records,
                             const std::string &task) {
  const auto text = read_text(path);
  std::map<std::string, std::size_t> by_name, by_field;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_name.emplace(trim(records[i].name), i);
    auto f = records[i].fields.find("ID");
    if (f != records[i].fields.end())
      by_field.emplace(trim(f->second), i);
  }

  std::vector<int> labels(records.size(), -1);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int id_col = -1, label_col = -1, task_col = -1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    const auto cols = split(line, ',');
    if (id_col < 0) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto h = trim(cols[c]);
        if (h == "id")
          id_col = static_cast<int>(c);
        else if (h == "label")
          label_col = static_cast<int>(c);
        else if (h == "task")
          task_col = static_cast<int>(c);
      }
      if (id_col < 0 || label_col < 0)
        throw DataError(path + ":" + std::to_string(lineno)
                        + ": header must name 'id' and 'label' columns");
      width = cols.size();
      continue;
    }
    const auto where = path + ":" + std::to_string(lineno);
    if (cols.size() != width)
      throw DataError(where + ": expected " + std::to_string(width)
                      + " columns, got " + std::to_string(cols.size()));
    if (task_col >= 0 && trim(cols[task_col]) != task)
      continue;
    const auto id = trim(cols[id_col]);
    std::size_t idx = records.size();
    if (auto it = by_name.find(id); it != by_name.end())
      idx = it->second;
    else if (auto jt = by_field.find(id); jt != by_field.end())
      idx = jt->second;
    else if (!id.empty() && std::all_of(id.begin(), id.end(), ::isdigit)
             && id.size() < 10 && std::stoul(id) < records.size())
      idx = std::stoul(id);
    if (idx == records.size())
      throw DataError(where + ": id '" + id + "' matches no molecule");
    const int y = parse_label(cols[label_col]);
    if (y < 0)
      throw DataError(where + ": bad label '" + trim(cols[label_col]) + "'");
    if (labels[idx] >= 0)
      throw DataError(where + ": molecule '" + id + "' labeled twice");
    labels[idx] = y;
  }
  if (id_col < 0)
    throw DataError(path + ": empty label file");
  return labels;
}

std::vector<mol::LabeledExample>
balance_classes(std::vector<mol::LabeledExample> examples, std::uint64_t seed) {
  std::vector<mol::LabeledExample> pos, neg;
  for (auto &e: examples)
    (e.label == 1 ? pos : neg).push_back(std::move(e));
  auto &major = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(seed);
  rng.shuffle(major);
  major.resize(keep);
  std::vector<mol::LabeledExample> out;
  // Restore a stable order so splits do not depend on the class partition.
  out.insert(out.end(), pos.begin(), pos.end());
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end(),
            [](const auto &a, const auto &b) { return a.id < b.id; });
  return out;
}

LoadedTask load_task(const TaskSource &source, int task_id,
                     const Settings &settings, std::uint64_t seed) {
  LoadedTask task;
  task.name = source.name;
  std::error_code ec;
  if (fs::is_directory(source.path, ec)) {
    const auto sdf = (fs::path(source.path) / "molecules.sdf").string();
    const auto csv = (fs::path(source.path) / "labels.csv").string();
    for (const auto &p: {sdf, csv})
      if (!fs::is_regular_file(p, ec))
        throw DataError("task '" + source.name + "': missing file '" + p + "'");
    const auto records = mol::read_sdf_file(sdf);
    const auto labels = read_labels(csv, records, source.name);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (labels[i] < 0)
        continue;
      auto g = mol::featurize(records[i], settings.vocab);
      std::string id = trim(records[i].name);
      if (id.empty())
        id = std::to_string(i);
      task.examples.push_back(
          {std::make_shared<const mol::MolecularGraph>(std::move(g)), task_id,
           labels[i], id});
    }
    if (task.examples.empty())
      throw DataError("task '" + source.name + "': no labeled molecules in '"
                      + csv + "'");
    if (settings.balance)
      task.examples = balance_classes(std::move(task.examples),
                                      derive_seed(seed, "balance:" + source.name));
    task.files = {{sdf, file_checksum(sdf)}, {csv, file_checksum(csv)}};
    return task;
  }
  if (!fs::is_regular_file(source.path, ec))
    throw DataError("task '" + source.name + "': no such dataset '"
                    + source.path + "'");
  const auto spec = mol::SyntheticSpec::from_config(KeyValueConfig::load(source.path));
  task.synthetic = true;
  task.elements = spec.elements;
  task.seed = derive_seed(seed, "synth:" + source.name);
  task.examples = mol::generate_synthetic(spec, task.seed, task_id);
  task.files = {{source.path, file_checksum(source.path)}};
  return task;
}

mol::ElementVocabulary fingerprint_vocabulary(const LoadedTask &task,
                                              const Settings &settings) {
  return task.synthetic ? mol::synthetic_vocabulary(task.elements)
                        : settings.vocab;
}

} // namespace graphmem::exp
