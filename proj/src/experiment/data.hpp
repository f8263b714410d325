#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "fingerprint/fingerprint.hpp"
#include "molgraph/featurize.hpp"
#include "molgraph/graph.hpp"
#include "training/trainer.hpp"

namespace graphmem::exp {

inline constexpr const char *kVersion = "1.0.0";

// Seed for a named consumer of the run seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string &tag);

// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_checksum(const std::string &path);

struct TaskSource {
  std::string name;
  std::string path; // directory with molecules.sdf + labels.csv, or a synthetic spec
};

struct Settings {
  train::TrainConfig train;
  bool multi = false;
  std::vector<TaskSource> tasks; // roster order defines task ids
  mol::ElementVocabulary vocab = mol::ElementVocabulary::organic();
  bool balance = false;
  int fp_radius = fp::kDefaultRadius;
  int fp_bits = fp::kDefaultBits;
  KeyValueConfig resolved;

  // Relative task paths resolve against base_dir. Unknown keys are errors.
  static Settings from_config(const KeyValueConfig &cfg,
                              const std::string &base_dir);
};

// Every key from_config accepts, with its default rendered as text.
KeyValueConfig default_config();

struct DatasetFile {
  std::string path;
  std::string checksum;
};

struct LoadedTask {
  std::string name;
  bool synthetic = false;
  int elements = 0; // synthetic alphabet size
  std::vector<mol::LabeledExample> examples;
  std::vector<DatasetFile> files;
  std::uint64_t seed = 0; // synthetic generation seed
};

// Rows "id,label" with a header; an optional "task" column restricts rows to
// the named task. id resolves to a record name, then an ID data item, then a
// 0-based record index. Labels: 0/1, active/inactive, true/false.
std::vector<int> read_labels(const std::string &path,
                             const std::vector<mol::MolecularGraph> &records,
                             const std::string &task);

LoadedTask load_task(const TaskSource &source, int task_id,
                     const Settings &settings, std::uint64_t seed);

// Majority-class subsample down to the minority count.
std::vector<mol::LabeledExample>
balance_classes(std::vector<mol::LabeledExample> examples, std::uint64_t seed);

// Vocabulary used to fingerprint a task's graphs.
mol::ElementVocabulary fingerprint_vocabulary(const LoadedTask &task,
                                              const Settings &settings);

} // namespace graphmem::exp
