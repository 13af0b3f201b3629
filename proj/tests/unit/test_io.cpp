#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tnc/error.hpp"
#include "tnc/io/config.hpp"
#include "tnc/io/csv.hpp"
#include "tnc/io/dataset_file.hpp"
#include "tnc/simgen.hpp"

using namespace tnc;
using namespace tnc::io;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "tnc_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

void expect_same(const TimeSeriesDataset& a, const TimeSeriesDataset& b) {
  ASSERT_EQ(a.n_instances(), b.n_instances());
  ASSERT_EQ(a.n_features(), b.n_features());
  ASSERT_EQ(a.length(), b.length());
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  ASSERT_EQ(a.has_labels(), b.has_labels());
  if (a.has_labels()) EXPECT_TRUE(std::ranges::equal(a.labels(), b.labels()));
  ASSERT_EQ(a.normalized(), b.normalized());
  if (a.normalized()) {
    EXPECT_EQ(a.normalization()->mean, b.normalization()->mean);
    EXPECT_EQ(a.normalization()->stddev, b.normalization()->stddev);
  }
}

}  // namespace

TEST(DatasetFile, RoundTripIsExact) {
  const auto data = simgen::assemble_dataset(simgen::benchmark_generator(), simgen::benchmark_hmm(), 3, 200, 5);
  expect_same(data, deserialize_dataset(serialize_dataset(data)));
  const auto path = scratch("round.tncd");
  save_dataset(data, path);
  expect_same(data, load_dataset(path));

  TimeSeriesDataset plain(2, 1, 4);
  for (std::size_t i = 0; i < 8; ++i) plain.values()[i] = static_cast<float>(i) - 3.5f;
  expect_same(plain, deserialize_dataset(serialize_dataset(plain)));
}

TEST(DatasetFile, CorruptionIsDetected) {
  const auto data = simgen::assemble_dataset(simgen::benchmark_generator(), simgen::benchmark_hmm(), 1, 100, 6);
  const std::string bytes = serialize_dataset(data);
  for (std::size_t pos : {std::size_t{0}, std::size_t{4}, std::size_t{30}, bytes.size() / 2, bytes.size() - 1}) {
    std::string bad = bytes;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x5a);
    EXPECT_THROW(deserialize_dataset(bad), LoadError) << "flipped byte " << pos;
  }
  EXPECT_THROW(deserialize_dataset(bytes.substr(0, bytes.size() - 10)), LoadError);
  EXPECT_THROW(deserialize_dataset(""), LoadError);
  const auto path = scratch("corrupt.tncd");
  write_text(path, bytes.substr(0, 40));
  try {
    load_dataset(path);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("corrupt.tncd"), std::string::npos);
  }
  EXPECT_THROW(load_dataset(scratch("missing.tncd")), LoadError);
}

TEST(Csv, HeaderDetectionAndLookup) {
  const auto t = parse_csv("a,b,state\n1,2,0\n3,4.5,1\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "state"}));
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_DOUBLE_EQ(t.columns[1][1], 4.5);
  EXPECT_EQ(t.column_index("state"), 2u);
  EXPECT_EQ(t.column_index("1"), 1u);
  try {
    t.column_index("label");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("state"), std::string::npos);
  }
  const auto n = parse_csv("1,2\n3,4\n");
  EXPECT_EQ(n.rows(), 2u);
  EXPECT_EQ(n.header, (std::vector<std::string>{"0", "1"}));
}

TEST(Csv, ErrorsNameTheLine) {
  try {
    parse_csv("a,b\n1,2\n3\n", "x.csv");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("x.csv:3"), std::string::npos) << e.what();
  }
  try {
    parse_csv("a,b\n1,2\n3,zz\n", "y.csv");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("y.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Csv, DatasetFromFiles) {
  const auto f1 = scratch("one.csv"), f2 = scratch("two.csv");
  write_text(f1, "x,y,state\n1,2,0\n3,4,1\n5,6,1\n");
  write_text(f2, "x,y,state\n7,8,2\n9,10,2\n11,12,0\n");
  const std::vector<std::filesystem::path> files{f1, f2};
  const auto d = dataset_from_csv(files, std::string("state"));
  EXPECT_EQ(d.n_instances(), 2u);
  EXPECT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.length(), 3u);
  EXPECT_FLOAT_EQ(d.at(1, 1, 2), 12.0f);
  EXPECT_EQ(d.label(1, 0), 2);
  EXPECT_EQ(dataset_from_csv(files).n_features(), 3u);

  write_text(f2, "x,y,state\n7,8,2\n9,10,2.5\n11,12,0\n");
  try {
    dataset_from_csv(files, std::string("state"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("data row 2"), std::string::npos) << e.what();
  }
  write_text(f2, "x,y,state\n7,8,2\n");
  EXPECT_THROW(dataset_from_csv(files, std::string("state")), Error);
}

TEST(Config, DefaultsAndRoundTrip) {
  auto c = parse_config("{}");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.generator.spec.grid, simgen::benchmark_generator().grid);
  c.seed = 7;
  c.threads = 2;
  c.train.epochs = 3;
  c.train.w = 0.05;
  c.eval.mode = "classify";
  c.paths.dataset = "d.tncd";
  c.generator.spec.grid[0][0] = simgen::ProcessSpec::gp_periodic(2.0, 1.5, 12.0);
  auto back = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.train.w, 0.05);
  EXPECT_EQ(back.generator.spec.grid[0][0], c.generator.spec.grid[0][0]);
  back.resolve();
  EXPECT_EQ(back.train.seed, 7u);
  EXPECT_EQ(back.train.threads, 2);

  const auto path = scratch("cfg.json");
  save_config(c, path);
  EXPECT_EQ(dump_config(load_config(path)), dump_config(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  try {
    parse_config(R"({"train": {"epochs": 2, "learning_rat": 0.1}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.learning_rat"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"w": 1.5}})").resolve(), ConfigError);
  EXPECT_THROW(parse_config(R"({"version": 99})").resolve(), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epochs": "ten"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(load_config(scratch("absent.json")), Error);
}
