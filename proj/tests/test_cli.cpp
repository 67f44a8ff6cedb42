// End-to-end runs of the gaudin_lab executable.
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gaudin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" GAUDIN_LAB_EXE "\" " + args + " > \"" + (dir_ / "stdout.txt").string() +
                            "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }
  std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  json read_json(const fs::path& p) { return json::parse(read(p)); }
  std::string out(const std::string& sub) { return (dir_ / sub).string(); }

  fs::path dir_;
};

const char* top_json = R"({
  "model": {"kind": "elliptic", "N": 2, "tau": [0, 1],
            "marked_points": [[0.1, 0.3], [0.5, 0.3]], "lambda": [[0, 0.9], [0, 1.1]]},
  "field": {"dimension": "0+1"},
  "flow": "second:1",
  "evolution": {"dt": 0.0002, "T": 0.05, "output_every": 10},
  "seed": 4
})";

}  // namespace

TEST_F(Cli, VerifyWritesReportAndProvenance) {
  EXPECT_EQ(run("verify --suite efun --samples 20 --seed 3 --out " + out("v"), "GAUDIN_LAB_THREADS=1"), 0);
  const json v = read_json(dir_ / "v" / "verify.json");
  EXPECT_TRUE(v["pass"].get<bool>());
  const json r = read_json(dir_ / "v" / "run.json");
  EXPECT_EQ(r["exit_code"], 0);
  EXPECT_EQ(r["seed"], 3);
  EXPECT_EQ(r["threads"], 1);
  EXPECT_TRUE(std::regex_match(r["config_hash"].get<std::string>(), std::regex("sha256:[0-9a-f]{64}")));
  for (const char* k : {"gaudin_lab", "eigen", "nlohmann_json", "cli11"}) EXPECT_TRUE(r["versions"].contains(k)) << k;
  EXPECT_GE(r["wall_time_s"].get<double>(), 0.0);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("verify --suite mech --samples 0 --out " + out("a")), 2);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "run.json"));
  EXPECT_EQ(read_json(dir_ / "a" / "run.json")["exit_code"], 2);
  EXPECT_EQ(run("verify --suite nonsense --out " + out("b")), 2);
  EXPECT_EQ(run("simulate --out " + out("c")), 2);
  EXPECT_EQ(run("simulate --config " + write("bad.json", R"({"model": {"kind": "x"}})") + " --out " + out("d")), 2);
  EXPECT_EQ(run("simulate --config " + write("broken.json", "{ not json") + " --out " + out("e")), 2);
  EXPECT_EQ(run("simulate --bogus-flag"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, SimulateTopWritesCsvAtFullPrecision) {
  const std::string cfg = write("top.json", top_json);
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + out("s")), 0) << read(dir_ / "stderr.txt");
  for (const char* f : {"monitors.csv", "trajectory.csv", "final_state.json", "summary.json", "run.json"})
    EXPECT_TRUE(fs::exists(dir_ / "s" / f)) << f;
  std::istringstream csv(read(dir_ / "s" / "monitors.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header.rfind("t,", 0), 0u);
  // Non-trivial values carry 17 significant digits.
  EXPECT_TRUE(std::regex_search(row, std::regex("[0-9]\\.[0-9]{16}")));
  const json s = read_json(dir_ / "s" / "summary.json");
  EXPECT_LT(s["max_drift"].get<double>(), 1e-9);
  // Complex entries are [re, im] pairs.
  const json fin = read_json(dir_ / "s" / "final_state.json");
  EXPECT_EQ(fin["sites"][0][0][0].size(), 2u);
}

TEST_F(Cli, SeedIsReproducible) {
  const std::string cfg = write("top.json", top_json);
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 9 --out " + out("a")), 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 9 --out " + out("b")), 0);
  EXPECT_EQ(read(dir_ / "a" / "trajectory.csv"), read(dir_ / "b" / "trajectory.csv"));
  EXPECT_EQ(read_json(dir_ / "a" / "run.json")["config_hash"], read_json(dir_ / "b" / "run.json")["config_hash"]);
}

TEST_F(Cli, BlowUpKeepsPartialOutputs) {
  const std::string cfg = write("boom.json", R"({
    "model": {"kind": "rational", "N": 2, "marked_points": [0, 0.01], "lambda": [1000, 1000]},
    "field": {"dimension": "0+1"}, "flow": "first:1",
    "evolution": {"dt": 10, "T": 10000}
  })");
  EXPECT_EQ(run("simulate --config " + cfg + " --out " + out("x")), 3);
  EXPECT_TRUE(fs::exists(dir_ / "x" / "monitors.csv.partial"));
  EXPECT_FALSE(fs::exists(dir_ / "x" / "monitors.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "x" / "run.json"));
  EXPECT_EQ(read_json(dir_ / "x" / "run.json")["exit_code"], 3);
}

TEST_F(Cli, ResidualControlFails) {
  const std::string cfg = write("top.json", top_json);
  EXPECT_EQ(run("residual --config " + cfg + " --samples 5 --out " + out("ok")), 0);
  const json r = read_json(dir_ / "ok" / "residual.json");
  EXPECT_LT(r["max"].get<double>(), 1e-9);
  EXPECT_EQ(r["count"].get<int>(), 5 * 2);  // x_samples defaults to 2
  EXPECT_EQ(run("residual --config " + cfg + " --samples 5 --perturb 0.01 --out " + out("bad")), 1);
  EXPECT_GT(read_json(dir_ / "bad" / "residual.json")["max"].get<double>(), 1e-2);
}

TEST_F(Cli, YamlConfigAndCharges) {
  const std::string cfg = write("pcm.yaml", R"(# two-site chiral field
scenario: pcm
seed: 2
field:
  G: 64
  M: 16
)");
  ASSERT_EQ(run("charges --config " + cfg + " --out " + out("c")), 0) << read(dir_ / "stderr.txt");
  const json c = read_json(dir_ / "c" / "charges.json");
  EXPECT_TRUE(c["pass"].get<bool>());
  EXPECT_EQ(c["H1"].size(), 2u);
  std::istringstream csv(read(dir_ / "c" / "densities.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("x,", 0), 0u);
}

TEST_F(Cli, ShippedConfigsPassResidual) {
  for (const auto& e : fs::directory_iterator(GAUDIN_CONFIG_DIR)) {
    SCOPED_TRACE(e.path().filename().string());
    const std::string o = out(e.path().stem().string());
    EXPECT_EQ(run("residual --config \"" + e.path().string() + "\" --samples 2 --out \"" + o + "\""), 0);
    EXPECT_TRUE(read_json(fs::path(o) / "residual.json").at("pass").get<bool>());
  }
}
