#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "hist4lt/io.hpp"

namespace fs = std::filesystem;
using hist4lt::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hist4lt");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hist4lt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenWritesSamplesAndManifest) {
  auto r = invoke({"gen", "--distribution", "D1", "--population", "P1", "--seed", "7", "--out", path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(path("a"))) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 10u);
  const auto manifest = nlohmann::json::parse(slurp(path("a/manifest.json")));
  EXPECT_EQ(manifest["distribution"], "D1");
  EXPECT_EQ(manifest["population"], "P1");
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_EQ(manifest["samples"], 10);

  const auto fs1 = hist4lt::load_frequency_csv(path("a/sample_000.csv"));
  EXPECT_EQ(fs1.size(), 4100u);
  EXPECT_EQ(fs1.total(), 100000u);
}

TEST_F(CliTest, GenIsByteIdentical) {
  ASSERT_EQ(invoke({"gen", "-d", "D3", "-p", "p(5000,300,50)", "--samples", "3", "-o", path("x")}).code, 0);
  ASSERT_EQ(invoke({"gen", "-d", "D3", "-p", "p(5000,300,50)", "--samples", "3", "-o", path("y")}).code, 0);
  for (const char* name : {"sample_000.csv", "sample_002.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(path("x/") + name), slurp(path("y/") + name)) << name;
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({"gen", "-d", "D9", "-p", "P1", "-o", path("z")}).code, 2);
  EXPECT_EQ(invoke({"gen", "-p", "P1", "-o", path("z")}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"build", "-i", path("none.csv"), "--estimator", "9lt"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, BuildReportsBucketsAndBits) {
  ASSERT_EQ(invoke({"gen", "-d", "D1", "-p", "P1", "--samples", "1", "-o", path("g")}).code, 0);
  const auto input = path("g/sample_000.csv");
  auto r = invoke({"build", "-i", input, "--method", "md", "--estimator", "cva", "--budget-bits", "1344", "-o", path("h.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("buckets=21 storage_bits=1344"), std::string::npos) << r.out;
  r = invoke({"build", "-i", input, "--method", "md", "--estimator", "4lt", "--budget-bits", "1344", "-o", path("h4.json")});
  EXPECT_NE(r.out.find("buckets=14 storage_bits=1344"), std::string::npos) << r.out;

  const auto hist = hist4lt::histogram_from_json(nlohmann::json::parse(slurp(path("h4.json"))));
  EXPECT_EQ(hist.bucket_count(), 14u);
  EXPECT_EQ(hist.estimator, hist4lt::EstimatorKind::Tree4LT);
  EXPECT_FALSE(hist4lt::validate(hist, hist4lt::load_frequency_csv(input)).has_value());

  r = invoke({"build", "-i", input, "--buckets", "5", "--method", "vo"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("buckets=5 storage_bits=320"), std::string::npos) << r.out;

  EXPECT_EQ(invoke({"build", "-i", input, "--budget-bits", "1344", "--buckets", "5"}).code, 2);
  EXPECT_EQ(invoke({"build", "-i", input, "--estimator", "4lt", "--budget-bits", "50"}).code, 2);
}

TEST_F(CliTest, MissingInputIsAnIoError) {
  EXPECT_EQ(invoke({"build", "-i", path("missing.csv")}).code, 3);
  EXPECT_EQ(invoke({"eval-hist", "-c", path("missing.json")}).code, 3);
  EXPECT_EQ(invoke({"ingest", "-i", path("missing.txt"), "-o", path("o.csv")}).code, 3);
}

TEST_F(CliTest, MalformedInputIsAnIoError) {
  std::ofstream(path("bad.csv")) << "1,2\nfoo,3\n";
  const auto r = invoke({"build", "-i", path("bad.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, IngestThenBuildAndEvaluate) {
  std::ofstream(path("raw.txt")) << "5\n5\n7\n";
  auto r = invoke({"ingest", "-i", path("raw.txt"), "-o", path("f.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("f.csv")), "# m=3\nindex,frequency\n1,2\n3,1\n");
  EXPECT_EQ(slurp(path("f.csv.map.csv")), "index,value\n1,5\n3,7\n");

  std::ofstream(path("empty.txt")) << "";
  EXPECT_EQ(invoke({"ingest", "-i", path("empty.txt"), "-o", path("e.csv")}).code, 3);
  std::ofstream(path("words.txt")) << "1\nabc\n";
  r = invoke({"ingest", "-i", path("words.txt"), "-o", path("w.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);

  std::ofstream raw(path("many.txt"));
  for (int i = 0; i < 3000; ++i) raw << (i * i) % 977 << "\n";
  raw.close();
  ASSERT_EQ(invoke({"ingest", "-i", path("many.txt"), "-o", path("many.csv")}).code, 0);
  ASSERT_EQ(invoke({"build", "-i", path("many.csv"), "--method", "vo", "--estimator", "4lt"}).code, 0);
  r = invoke({"eval-hist", "-i", path("many.csv"), "-o", path("rep")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("rep/inputs.csv")));
}

TEST_F(CliTest, EvalBucketIsDeterministic) {
  const std::vector<std::string> args{"eval-bucket", "--group", "zipf-z", "--samples", "2", "--seed", "4"};
  auto a = args;
  a.insert(a.end(), {"-o", path("r1")});
  auto b = args;
  b.insert(b.end(), {"-o", path("r2"), "--threads", "1"});
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  EXPECT_EQ(slurp(path("r1/zipf-z_avg_rel.csv")), slurp(path("r2/zipf-z_avg_rel.csv")));
  EXPECT_EQ(slurp(path("r1/inside_bucket.json")), slurp(path("r2/inside_bucket.json")));
  const auto csv = slurp(path("r1/zipf-z_avg_rel.csv"));
  EXPECT_EQ(csv.rfind("method,z=0.5,z=1.0,z=1.5\n", 0), 0u) << csv;
}

TEST_F(CliTest, EvalHistTableShape) {
  std::ofstream(path("cfg.json")) << R"j({"seed": 2, "histograms": 1, "populations": ["p(4000,400,60)"],
    "distributions": ["D1", "D2", "D3", "D4", "D5"], "sweep_budgets": [640, 1344]})j";
  const auto r = invoke({"eval-hist", "-c", path("cfg.json"), "-o", path("rep")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(slurp(path("rep/table_p(4000,400,60).csv")));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "method,D1,D2,D3,D4,D5");
  std::size_t rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 6u);
  EXPECT_TRUE(fs::exists(path("rep/sweep.csv")));
  const auto doc = nlohmann::json::parse(slurp(path("rep/histogram.json")));
  EXPECT_EQ(doc["config"]["seed"], 2);

  std::ofstream(path("bad.json")) << R"({"distributions": ["D7"]})";
  EXPECT_EQ(invoke({"eval-hist", "-c", path("bad.json"), "-o", path("rep2")}).code, 2);
  std::ofstream(path("broken.json")) << "{";
  EXPECT_EQ(invoke({"eval-hist", "-c", path("broken.json"), "-o", path("rep3")}).code, 3);
}
