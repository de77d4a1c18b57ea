#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "forestgd/graph_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(FORESTGD_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("forestgd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    auto path = dir_ / name;
    std::ofstream(path) << content;
    return path.string();
  }

  fs::path dir_;
};

std::vector<double> parse_estimate(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node,value");
  std::vector<double> values;
  while (std::getline(in, line)) values.push_back(std::stod(line.substr(line.find(',') + 1)));
  return values;
}

}  // namespace

TEST_F(CliTest, ExactOnPathOfThree) {
  auto g = write("p3.txt", "0 1\n1 2\n");
  auto y = write("y.txt", "8\n0\n0\n");
  auto r = run_cli("exact --graph " + g + " --signal " + y + " --q 1");
  ASSERT_EQ(r.code, 0);
  auto x = parse_estimate(r.out);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_NEAR(x[0], 5.0, 1e-10);
  EXPECT_NEAR(x[1], 2.0, 1e-10);
  EXPECT_NEAR(x[2], 1.0, 1e-10);
}

TEST_F(CliTest, SmoothConstantSignalReturnsInput) {
  auto g = write("c4.txt", "0 1\n1 2\n2 3\n3 0\n");
  for (const char* alpha : {"safe", "empirical", "0.7"}) {
    auto r = run_cli("smooth --graph " + g + " --signal-gen constant:2.5 --q 0.3 --n-samples 7 --alpha " + alpha);
    ASSERT_EQ(r.code, 0) << alpha;
    for (double v : parse_estimate(r.out)) EXPECT_EQ(v, 2.5) << alpha;
  }
}

TEST_F(CliTest, JsonOutputCarriesSchemaAndDiagnostics) {
  auto g = write("p3.txt", "0 1\n1 2\n");
  auto r = run_cli("smooth --graph " + g + " --signal-gen constant:1 --alpha empirical --format json");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"schema\": \"1\""), std::string::npos);
  EXPECT_NE(r.out.find("\"zero_variance_fallback\": true"), std::string::npos);
}

TEST_F(CliTest, SameSeedGivesIdenticalBytes) {
  const std::string base = "smooth --gen regular:n=60,d=4 --signal-gen normal --q 0.5 --n-samples 200 --seed 11 ";
  auto a = run_cli(base + "--alpha empirical --threads 1");
  auto b = run_cli(base + "--alpha empirical --threads 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto c = run_cli(base + "--alpha empirical --threads 3");
  EXPECT_EQ(b.out, c.out);

  const std::string sweep =
      "sweep-alpha --gen ba:n=80,k=3 --q 1 --n-samples 5 --realizations 6 --alpha-grid 0:1:5 --seed 4 ";
  auto s1 = run_cli(sweep + "--threads 1");
  auto s2 = run_cli(sweep + "--threads 4");
  ASSERT_EQ(s1.code, 0);
  EXPECT_EQ(s1.out, s2.out);
}

TEST_F(CliTest, GenGraphRoundTrip) {
  auto out = (dir_ / "reg.txt").string();
  ASSERT_EQ(run_cli("gen-graph --gen regular:n=1000,d=20 --seed 3 --out " + out).code, 0);
  auto g = forestgd::load_graph(out);
  EXPECT_EQ(g.num_vertices(), 1000u);
  EXPECT_EQ(g.num_edges(), 10000u);
  EXPECT_EQ(g.max_degree(), 20.0);
}

TEST_F(CliTest, SweepAlphaZeroStepMatchesXbar) {
  auto r = run_cli("sweep-alpha --gen grid:rows=5,cols=6 --q 1 --n-samples 4 --realizations 10 "
                   "--alpha-grid 0:0.5:3 --seed 2");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header.rfind("alpha,mse_xbar,mse_zbar", 0), 0u);
  std::vector<std::string> cells;
  std::stringstream row(first);
  for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
  ASSERT_GE(cells.size(), 3u);
  EXPECT_EQ(std::stod(cells[0]), 0.0);
  EXPECT_EQ(cells[1], cells[2]);
}

TEST_F(CliTest, DenoiseAndSslRun) {
  auto d = run_cli("denoise --gen grid:rows=6,cols=6 --q-grid 0.1,1 --realizations 3 --seed 1");
  ASSERT_EQ(d.code, 0);
  EXPECT_NE(d.out.find("q,psnr_y,psnr_exact,psnr_xbar,psnr_zbar_safe,psnr_zbar_hat"), std::string::npos);

  auto s = run_cli("ssl --gen cliques:count=2,size=20 --labels-per-class 1,2 --repeats 3 --n-samples 10 --seed 1");
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(s.out.rfind("m,method,mean_acc,std_acc\n", 0), 0u);
  EXPECT_NE(s.out.find("2,zbar_safe,"), std::string::npos);

  std::string labels = "node,class_id\n";
  for (int v = 0; v < 6; ++v) labels += std::to_string(v) + "," + (v < 3 ? "7" : "9") + "\n";
  auto lp = write("labels.csv", labels);
  auto gp = write("g.txt", "0 1\n1 2\n0 2\n2 3\n3 4\n4 5\n3 5\n");
  auto ls = write("set.txt", "0\n5\n");
  auto f = run_cli("ssl --graph " + gp + " --labels " + lp + " --labeled-set " + ls + " --n-samples 50");
  ASSERT_EQ(f.code, 0);
  EXPECT_NE(f.out.find("exact,1,"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  auto g = write("p3.txt", "0 1\n1 2\n");
  auto y = write("y.txt", "1\n2\n3\n");
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("exact --no-such-flag").code, 2);
  EXPECT_EQ(run_cli("exact --signal " + y).code, 2);
  EXPECT_EQ(run_cli("exact --graph " + g + " --gen grid:rows=2,cols=2 --signal " + y).code, 2);
  EXPECT_EQ(run_cli("smooth --graph " + g + " --signal " + y + " --alpha sometimes").code, 2);
  EXPECT_EQ(run_cli("exact --graph " + g + " --signal " + y + " --format xml").code, 2);

  EXPECT_EQ(run_cli("exact --graph " + (dir_ / "missing.txt").string() + " --signal " + y).code, 3);
  auto disconnected = write("two.txt", "0 1\n2 3\n");
  EXPECT_EQ(run_cli("exact --graph " + disconnected + " --signal-gen normal").code, 3);
  auto bad_weight = write("neg.txt", "0 1 -2\n1 2\n");
  EXPECT_EQ(run_cli("exact --graph " + bad_weight + " --signal " + y).code, 3);
  EXPECT_EQ(run_cli("exact --graph " + g + " --signal " + y + " --q 0").code, 3);
  auto short_signal = write("short.txt", "1\n2\n");
  EXPECT_EQ(run_cli("exact --graph " + g + " --signal " + short_signal).code, 3);
}
