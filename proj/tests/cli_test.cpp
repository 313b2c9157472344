#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + MEME_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<json> json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("meme_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  std::string identity(int n) {
    std::ostringstream s;
    s << "%%MatrixMarket matrix coordinate real symmetric\n" << n << ' ' << n << ' ' << n << '\n';
    for (int i = 1; i <= n; ++i) s << i << ' ' << i << " 1.0\n";
    return write("identity.mtx", s.str());
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, IdentityMatrixLogdetNearZero) {
  const auto r = run("logdet " + identity(100) + " --exact");
  ASSERT_TRUE(r.status == 0 || r.status == 2);
  const auto recs = json_lines(r.out);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0]["n"], 100);
  EXPECT_LT(std::abs(recs[0]["logdet_est"].get<double>()), 0.1);
  EXPECT_EQ(recs[0]["logdet_true"].get<double>(), 0.0);
  EXPECT_TRUE(recs[0]["rel_err"].is_null());
  EXPECT_EQ(recs[0]["converged"].get<bool>(), r.status == 0);
  EXPECT_EQ(recs[0]["config"]["moments"], 30);
}

TEST_F(CliTest, KernelRecordsForEveryMethod) {
  const auto r = run("logdet --kernel n=200 l=0.05 --exact --methods meme,taylor,chebyshev");
  ASSERT_EQ(r.status, 0);
  const auto recs = json_lines(r.out);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& rec : recs) {
    for (const char* key : {"method", "n", "l", "kappa", "logdet_est", "logdet_true", "rel_err", "seconds", "seed",
                            "lambda_u", "converged", "config"})
      EXPECT_TRUE(rec.contains(key)) << key;
    EXPECT_EQ(rec["logdet_true"], recs[0]["logdet_true"]);
    EXPECT_GT(rec["kappa"].get<double>(), 1.0);
    EXPECT_LT(rec["rel_err"].get<double>(), 0.5);
  }
  EXPECT_EQ(recs[1]["method"], "taylor");
}

TEST_F(CliTest, OutputIsDeterministicAcrossRunsAndThreads) {
  const std::string args = "logdet --kernel n=150 --sweep-l 0.05,0.25,0.45 --repeats 2 --no-timing";
  const auto a = run(args, "MEME_THREADS=1");
  const auto b = run(args, "MEME_THREADS=3");
  const auto c = run(args, "MEME_THREADS=3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(b.out, c.out);
  const auto recs = json_lines(a.out);
  ASSERT_EQ(recs.size(), 6u);
  EXPECT_EQ(recs[0]["l"], 0.05);
  EXPECT_EQ(recs[1]["seed"], 1);
  EXPECT_EQ(recs[5]["l"], 0.45);
}

TEST_F(CliTest, SweepCsvSchema) {
  const auto r = run("logdet --kernel n=100 --sweep-l 0.05,0.15 --format csv --exact --no-timing");
  ASSERT_EQ(r.status, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0].rfind("# config {", 0), 0u);
  EXPECT_EQ(ls[1], "method,n,l,kappa,logdet_est,logdet_true,abs_err,rel_err,seconds,seed,lambda_u,converged");
  EXPECT_EQ(ls[2].rfind("meme,100,0.05,", 0), 0u);
}

TEST_F(CliTest, ConfigFileMergedAndFlagsWin) {
  const auto cfg = write("cfg.json", R"({"moments": 12, "probes": 7, "kernel": {"n": 120}})");
  const auto r = run("logdet --config " + cfg + " --moments 14 --no-timing");
  ASSERT_EQ(r.status, 0);
  const auto rec = json_lines(r.out).at(0);
  EXPECT_EQ(rec["config"]["moments"], 14);
  EXPECT_EQ(rec["config"]["probes"], 7);
  EXPECT_EQ(rec["n"], 120);
}

TEST_F(CliTest, BadInputsExitOne) {
  EXPECT_EQ(run("logdet --config " + write("a.json", R"({"momentz": 3})")).status, 1);
  EXPECT_EQ(run("logdet --config " + write("b.json", R"({"moments": "ten"})")).status, 1);
  EXPECT_EQ(run("logdet --config " + write("c.json", R"({"kernel": {"m": 3}})")).status, 1);
  EXPECT_EQ(run("logdet --config " + write("d.json", "{not json")).status, 1);
  EXPECT_EQ(run("logdet " + write("bad.mtx", "%%MatrixMarket matrix coordinate real symmetric\n2 2\n")).status, 1);
  EXPECT_EQ(run("logdet " + (dir_ / "missing.mtx").string()).status, 1);
  EXPECT_EQ(run("logdet " + identity(5) + " --kernel n=10").status, 1);
  EXPECT_EQ(run("logdet --kernel n=1").status, 1);
  EXPECT_EQ(run("logdet --kernel n=100 --basis hermite").status, 1);
  EXPECT_EQ(run("logdet --kernel n=100 --methods lanczos").status, 1);
  EXPECT_EQ(run("logdet --no-such-flag").status, 1);
  EXPECT_EQ(run("").status, 1);
}

TEST_F(CliTest, SingleGaussianEntropyMethodsAgree) {
  const auto path = write("g.json", R"({"components":[{"w":1.0,"mean":0.5,"std":2.0}]})");
  const auto r = run("gmm-entropy " + path + " --methods quad,mm,meme");
  ASSERT_EQ(r.status, 0);
  const auto res = json_lines(r.out).at(0)["results"];
  const double mm = res["mm"]["value"];
  EXPECT_NEAR(res["quad"]["value"].get<double>(), mm, 1e-6);
  EXPECT_NEAR(res["meme"]["value"].get<double>(), mm, 1e-3);
  EXPECT_TRUE(res["meme"]["converged"].get<bool>());
  EXPECT_TRUE(res["meme"].contains("seconds"));
}

TEST_F(CliTest, MixtureBatchSummary) {
  const auto path = write("batch.json", R"({"mixtures":[
      {"components":[{"w":0.5,"mean":-1,"std":0.5},{"w":0.5,"mean":1,"std":0.5}]},
      {"components":[{"w":0.3,"mean":0,"std":1},{"w":0.7,"mean":4,"std":0.3}]}]})");
  const auto r = run("gmm-entropy " + path);
  ASSERT_EQ(r.status, 0);
  const auto recs = json_lines(r.out);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[2]["count"], 2);
  EXPECT_EQ(recs[2]["summary"]["quad"]["mean_fractional_error"], 0.0);
  EXPECT_LT(recs[2]["summary"]["meme"]["mean_fractional_error"].get<double>(), 3e-2);
  EXPECT_GT(recs[2]["summary"]["mm"]["mean_fractional_error"].get<double>(), 0.0);
}

TEST_F(CliTest, RandomMixturesDeterministic) {
  const auto a = run("gmm-entropy --random 3 --components 20 --seed 4 --no-timing");
  const auto b = run("gmm-entropy --random 3 --components 20 --seed 4 --no-timing");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json_lines(a.out).at(0)["components"], 20);
}

TEST_F(CliTest, InvalidMixturesExitOne) {
  EXPECT_EQ(run("gmm-entropy " + write("a.json", R"({"components":[{"w":1,"mean":0,"sd":1}]})")).status, 1);
  EXPECT_EQ(run("gmm-entropy " + write("b.json", R"({"components":[{"w":0.5,"mean":0,"std":1}]})")).status, 1);
  EXPECT_EQ(run("gmm-entropy " + write("c.json", R"({"components":[{"w":1,"mean":0,"std":-1}]})")).status, 1);
  EXPECT_EQ(run("gmm-entropy " + write("d.json", R"({"components":[]})")).status, 1);
  EXPECT_EQ(run("gmm-entropy " + write("e.json", "[")).status, 1);
  EXPECT_EQ(run("gmm-entropy").status, 1);
}

TEST_F(CliTest, NonConvergenceExitsTwo) {
  const auto path = write("g.json", R"({"components":[{"w":0.5,"mean":-3,"std":0.1},{"w":0.5,"mean":3,"std":0.1}]})");
  const auto r = run("gmm-entropy " + path + " --methods meme --moments 30 --tol 1e-14");
  EXPECT_EQ(r.status, 2);
  const auto rec = json_lines(r.out).at(0);
  EXPECT_FALSE(rec["results"]["meme"]["converged"].get<bool>());
  EXPECT_TRUE(rec["results"]["meme"]["value"].is_number());
}

TEST_F(CliTest, BoConstantObjectiveZeroRegret) {
  const auto r = run("bo-demo constant --iterations 3 --points 15 --acquisition quad --no-timing");
  ASSERT_EQ(r.status, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 8u);
  EXPECT_EQ(ls[1], "iter,x0,y,ir,seconds");
  for (std::size_t i = 2; i < ls.size(); ++i) {
    std::vector<std::string> fields;
    std::istringstream row(ls[i]);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 5u);
    EXPECT_EQ(fields[3], "0") << ls[i];
  }
}

TEST_F(CliTest, BoTraceDeterministicAndWrittenToFile) {
  const auto out = (dir_ / "trace.csv").string();
  const std::string args = "bo-demo branin --iterations 2 --points 10 --acquisition meme-legendre-10 --seed 3 --no-timing";
  ASSERT_EQ(run(args + " --output " + out).status, 0);
  std::ifstream in(out);
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(file, run(args).out);
  EXPECT_EQ(lines(file).at(1), "iter,x0,x1,y,ir,seconds");
  EXPECT_EQ(lines(file).size(), 2u + 3u + 2u);
}

TEST_F(CliTest, BoUnknownObjectiveOrAcquisition) {
  EXPECT_EQ(run("bo-demo hartmann6").status, 1);
  EXPECT_EQ(run("bo-demo sinusoid --acquisition ucb").status, 1);
  EXPECT_EQ(run("bo-demo sinusoid --iterations 0").status, 1);
}
