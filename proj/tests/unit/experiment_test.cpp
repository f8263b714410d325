#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "experiment/data.hpp"
#include "experiment/runs.hpp"
#include "molgraph/molfile.hpp"

using namespace graphmem;
using namespace graphmem::exp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("graphmem_experiment_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

std::vector<mol::MolecularGraph> three_records() {
  std::vector<mol::MolecularGraph> out;
  for (int i = 0; i < 3; ++i) {
    mol::MolecularGraph g({{"C"}, {"O"}}, 4);
    g.add_edge(0, 1, 1);
    g.name = "mol" + std::to_string(i);
    if (i == 1)
      g.fields["ID"] = "CID-42";
    out.push_back(g);
  }
  return out;
}

} // namespace

TEST(Settings, DefaultsAndOverrides) {
  const auto s = Settings::from_config(KeyValueConfig::parse("hops=4\nmode=multi", "t"), "");
  EXPECT_EQ(s.train.hops, 4);
  EXPECT_TRUE(s.multi);
  EXPECT_EQ(s.train.query, train::QueryMode::kOneHot);
  EXPECT_EQ(s.train.memory_size, 32);
  EXPECT_EQ(Settings::from_config({}, "").train.hops, 10);
}

TEST(Settings, Errors) {
  auto bad = [](const char *text) {
    return Settings::from_config(KeyValueConfig::parse(text, "t"), "");
  };
  EXPECT_THROW(bad("colour=blue"), ConfigError);
  EXPECT_THROW(bad("hops=0"), ConfigError);
  EXPECT_THROW(bad("dropout=1"), ConfigError);
  EXPECT_THROW(bad("mode=both"), ConfigError);
  EXPECT_THROW(bad("tasks=a"), ConfigError);
  EXPECT_THROW(bad("tasks=a,a\ntask.a=x"), ConfigError);
  EXPECT_THROW(bad("hops=three"), ConfigError);
}

TEST(Settings, TaskPathsResolveAgainstConfigDirectory) {
  const auto s = Settings::from_config(KeyValueConfig::parse("tasks=a\ntask.a=data/a", "t"),
                                       "/base");
  ASSERT_EQ(s.tasks.size(), 1u);
  EXPECT_EQ(s.tasks[0].path, "/base/data/a");
  EXPECT_EQ(*s.resolved.get("task.a"), "/base/data/a");
}

TEST(Labels, ResolveByNameFieldAndIndex) {
  const auto dir = scratch("labels");
  write(dir / "l.csv", "id,task,label\nmol0,x,1\nCID-42,x,inactive\n2,x,active\nmol1,y,1\n");
  const auto labels = read_labels((dir / "l.csv").string(), three_records(), "x");
  EXPECT_EQ(labels, (std::vector<int>{1, 0, 1}));
}

TEST(Labels, ErrorsNamePathAndLine) {
  const auto dir = scratch("labels_bad");
  const auto path = (dir / "l.csv").string();
  auto message = [&](const std::string &text) {
    write(path, text);
    try {
      read_labels(path, three_records(), "x");
    } catch (const DataError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("id,label\nnope,1\n").find(path + ":2"), std::string::npos);
  EXPECT_NE(message("id,label\nmol0,maybe\n").find("bad label"), std::string::npos);
  EXPECT_NE(message("id,label\nmol0,1\nmol0,0\n").find("twice"), std::string::npos);
  EXPECT_NE(message("name,label\n").find("header"), std::string::npos);
  EXPECT_THROW(read_labels((dir / "missing.csv").string(), three_records(), "x"), DataError);
}

TEST(LoadTask, MissingLabelFileNamesPath) {
  const auto dir = scratch("missing");
  write(dir / "molecules.sdf", mol::write_molfile(three_records()[0]) + "$$$$\n");
  Settings s;
  try {
    load_task({"t", dir.string()}, 0, s, 1);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find((dir / "labels.csv").string()), std::string::npos);
  }
}

TEST(LoadTask, SdfDirectoryAndBalance) {
  const auto dir = scratch("sdf");
  std::string sdf, csv = "id,label\n";
  for (int i = 0; i < 10; ++i) {
    mol::MolecularGraph g({{"C"}, {"N"}}, 4);
    g.add_edge(0, 1, i % 3 == 0 ? 2 : 1);
    g.name = "m" + std::to_string(i);
    sdf += mol::write_molfile(g) + "$$$$\n";
    csv += g.name + "," + (i < 3 ? "1" : "0") + "\n";
  }
  write(dir / "molecules.sdf", sdf);
  write(dir / "labels.csv", csv);
  Settings s;
  auto t = load_task({"t", dir.string()}, 0, s, 1);
  EXPECT_EQ(t.examples.size(), 10u);
  EXPECT_EQ(t.files.size(), 2u);
  EXPECT_EQ(t.examples[0].graph->feature_dim(), mol::molecular_feature_dim(s.vocab));
  s.balance = true;
  t = load_task({"t", dir.string()}, 0, s, 1);
  int pos = 0;
  for (const auto &e: t.examples)
    pos += e.label;
  EXPECT_EQ(t.examples.size(), 6u);
  EXPECT_EQ(pos, 3);
}

TEST(Gradcheck, PassesOnRandomGraphs) {
  const auto r = run_gradcheck(7, 5, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.per_graph.size(), 5u);
  EXPECT_LE(r.max_error, 1e-4);
}

TEST(Checksum, StableAndSensitive) {
  const auto dir = scratch("sum");
  write(dir / "a", "hello");
  write(dir / "b", "hellp");
  EXPECT_EQ(file_checksum((dir / "a").string()), file_checksum((dir / "a").string()));
  EXPECT_NE(file_checksum((dir / "a").string()), file_checksum((dir / "b").string()));
  // FNV-1a 64 of "hello".
  EXPECT_EQ(file_checksum((dir / "a").string()), "a430d84680aabd0b");
}
