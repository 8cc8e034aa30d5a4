#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace ctap::cli;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ctap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int run_binary(const std::string& args) {
  const std::string cmd = std::string(CTAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliRun, RectSummary) {
  RunConfig c;
  c.model = "rect";
  c.initial = "3";
  c.output_dir = fresh_dir("rect");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(c, out, err), kExitOk) << err.str();
  const auto s = read_json(fs::path(c.output_dir) / "rect_summary.json");
  EXPECT_EQ(s["model"], "rect");
  EXPECT_GE(s["fidelity_site7"].get<double>(), 0.99);
  EXPECT_EQ(s["config"]["omega0_tp"], 30.0);
  EXPECT_EQ(s["final_populations"].size(), 9u);
  EXPECT_TRUE(s.contains("units"));
  EXPECT_LT(s["max_norm_drift"].get<double>(), 1e-8);
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "rect_populations.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "rect_snapshots.json"));
  EXPECT_EQ(slurp(fs::path(c.output_dir) / "rect_populations.csv").substr(0, 12), "t,p_1,p_2,p_");
}

TEST(CliRun, TriSummary) {
  RunConfig c;
  c.model = "tri";
  c.n = 3;
  c.omega0_tp = 100.0;
  c.tau_tp = 2.0;
  c.sigma = 2.0;
  c.initial = "3,0";
  c.output_dir = fresh_dir("tri");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(c, out, err), kExitOk) << err.str();
  const auto s = read_json(fs::path(c.output_dir) / "tri_summary.json");
  EXPECT_GE(s["fidelity"].get<double>(), 0.99);
  EXPECT_EQ(s["target_site"], json({0, 3}));
  EXPECT_EQ(read_json(fs::path(c.output_dir) / "tri_snapshots.json").size(), 5u);
}

TEST(CliRun, ByteIdenticalOutputs) {
  RunConfig c;
  c.model = "rect";
  c.omega0_tp = 10.0;
  std::ostringstream out, err;
  const auto a = fresh_dir("bytes_a"), b = fresh_dir("bytes_b");
  c.output_dir = a;
  ASSERT_EQ(cmd_run(c, out, err), kExitOk);
  c.output_dir = b;
  ASSERT_EQ(cmd_run(c, out, err), kExitOk);
  for (const char* f : {"rect_populations.csv", "rect_snapshots.json", "rect_summary.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(CliRun, ValidationFailures) {
  std::ostringstream out, err;
  RunConfig c;
  c.output_dir = fresh_dir("bad");
  c.omega0_tp = -1.0;
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
  c.omega0_tp = 30.0;
  c.initial = "11";
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
  c.model = "tri";
  c.initial = "4,0";
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
  c.model = "halfsquare";
  c.initial.clear();
  c.sigma = 1.0;
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
  c.model = "nonsense";
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
  EXPECT_FALSE(err.str().empty());
}

TEST(CliRun, UnwritableOutput) {
  const auto dir = fresh_dir("unwritable");
  std::ofstream(dir / "file") << "x";
  RunConfig c;
  c.model = "ionmap";
  c.output_dir = (dir / "file" / "sub").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(c, out, err), kExitValidation);
}

TEST(CliRun, IonmapCsv) {
  RunConfig c;
  c.model = "ionmap";
  c.n = 3;
  c.output_dir = fresh_dir("ionmap");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(c, out, err), kExitOk);
  const auto csv = slurp(fs::path(c.output_dir) / "ionmap_symbolic.csv");
  EXPECT_NE(csv.find("\n5,0,sqrt(2)*Omega2,sqrt(2)*Omega1,sqrt(2)*Omega3,0,sqrt(2)*Omega3,0,sqrt(2)*Omega1,"
                     "sqrt(2)*Omega2,0\n"),
            std::string::npos);
  EXPECT_EQ(read_json(fs::path(c.output_dir) / "ionmap_summary.json")["single_excitation_deviation"], 0.0);
}

TEST(CliOracle, RectSeed42Passes) {
  RunConfig c;
  c.model = "rect";
  c.seed = 42;
  c.output_dir = fresh_dir("oracle_rect");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_oracle(c, out, err), kExitOk) << err.str();
  const auto s = read_json(fs::path(c.output_dir) / "oracle_rect_summary.json");
  EXPECT_LE(s["max_deviation"].get<double>(), 1e-6);
  EXPECT_EQ(s["seed"], 42);
}

TEST(CliOracle, TriPassesAndCoarseStepFails) {
  RunConfig c;
  c.model = "tri";
  c.n = 2;
  c.output_dir = fresh_dir("oracle_tri");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_oracle(c, out, err), kExitOk) << err.str();
  c.dt = 0.2;
  EXPECT_EQ(cmd_oracle(c, out, err), kExitNumerical);
  EXPECT_NE(out.str().find("max deviation"), std::string::npos);
  c.model = "halfsquare";
  EXPECT_EQ(cmd_oracle(c, out, err), kExitValidation);
}

TEST(CliSweep, SinglePointAndStableOrder) {
  RunConfig c;
  c.model = "rect";
  c.grid = {20.0};
  c.output_dir = fresh_dir("sweep1");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(c, out, err), kExitOk) << err.str();
  const auto csv = slurp(fs::path(c.output_dir) / "sweep_rect.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "omega0-tp,fidelity,min_gap,min_relative_gap");
  c.grid.clear();
  EXPECT_EQ(cmd_sweep(c, out, err), kExitValidation);
}

TEST(CliSweep, SigmaGapColumn) {
  RunConfig c;
  c.model = "spectrum";
  c.param = "sigma";
  c.grid = {0.0, 1.0, 2.0};
  c.omega0_tp = 20.0;
  c.tau_tp = 2.0;
  c.output_dir = fresh_dir("sweep_sigma");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(c, out, err), kExitOk) << err.str();
  const auto s = read_json(fs::path(c.output_dir) / "sweep_spectrum_summary.json");
  ASSERT_EQ(s["rows"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s["rows"][i]["value"], c.grid[i]);
    EXPECT_GT(s["rows"][i]["min_gap"].get<double>(), 0.0);
  }
}

TEST(CliSpectrumAndDark, Outputs) {
  RunConfig c;
  c.omega0_tp = 100.0;
  c.tau_tp = 2.0;
  c.sigma = 2.0;
  c.output_dir = fresh_dir("spectrum");
  std::ostringstream out, err;
  c.model = "spectrum";
  ASSERT_EQ(cmd_spectrum(c, out, err), kExitOk) << err.str();
  const auto s = read_json(fs::path(c.output_dir) / "spectrum_summary.json");
  EXPECT_FALSE(s["spectrum"]["crossing"].get<bool>());
  c.model = "halfsquare";
  c.sigma.reset();
  c.count = 20;
  ASSERT_EQ(cmd_darkstate(c, out, err), kExitOk) << err.str();
  EXPECT_LT(read_json(fs::path(c.output_dir) / "darkstate_halfsquare_summary.json")["max_residual"].get<double>(),
            1e-12);
}

TEST(CliBinary, ExitCodesAndEnvironmentDirectory) {
  const auto dir = fresh_dir("binary");
  EXPECT_EQ(run_binary("ionmap --n 2 --output-dir " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ionmap_symbolic.csv"));
  EXPECT_EQ(run_binary("run --model rect --omega0-tp -3 --output-dir " + dir.string()), 1);
  EXPECT_EQ(run_binary("run --bogus-flag"), 1);
  EXPECT_EQ(run_binary("oracle --model tri --n 2 --dt 0.2 --output-dir " + dir.string()), 2);
  const auto env_dir = fresh_dir("binary_env");
  EXPECT_EQ(run_binary("frobnicate"), 1);
  const std::string cmd = "CTAP_OUTPUT_DIR=" + env_dir.string() + " " + CTAP_CLI_PATH + " ionmap --n 1 >/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env_dir / "ionmap_summary.json"));
}
