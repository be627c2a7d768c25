#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string out_file =
      (fs::temp_directory_path() / "uavrl_cli_out.txt").string();
  const std::string cmd =
      std::string(UAVRL_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream f(out_file);
  std::stringstream ss;
  ss << f.rdbuf();
  r.output = ss.str();
  return r;
}

std::string data(const std::string& name) {
  return std::string(UAVRL_DATA_DIR) + "/" + name;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag)
      : path(fs::temp_directory_path() / (std::string("uavrl_test_") + tag)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("tune --out /tmp/x --space missing.ini --trials 0").exit_code == 2);
  CHECK(run_cli("fly --out /tmp/x --trajectory " + data("traj_square.txt") +
                " --mode rl")
            .exit_code == 2);
  CHECK(run_cli("fly --out /tmp/x --trajectory " + data("traj_square.txt") +
                " --wind 5@400")
            .exit_code == 2);
  CHECK(run_cli("eval --out /tmp/x --study sideways").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("missing input files fail before any output is written") {
  TempDir out("noout");
  const RunResult r =
      run_cli("fly --out " + out.str() + " --trajectory /nonexistent.txt");
  CHECK(r.exit_code == 1);
  CHECK_FALSE(fs::exists(out.path));
}

TEST_CASE("help output names every documented flag") {
  const RunResult top = run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"tune", "train", "fly", "eval", "plot"})
    CHECK(top.output.find(sub) != std::string::npos);

  const struct {
    const char* cmd;
    std::vector<const char*> flags;
  } cases[] = {
      {"tune",
       {"--out", "--space", "--mode", "--wind", "--trials", "--seed",
        "--eval-episodes", "--rl-train-episodes", "--compare-with", "--serial",
        "--fresh", "--vehicle", "--gains", "--episode", "--rl"}},
      {"train",
       {"--out", "--wind", "--episodes", "--seed", "--serial", "--vehicle",
        "--gains", "--episode", "--rl"}},
      {"fly",
       {"--out", "--trajectory", "--mode", "--policy", "--wind",
        "--wind-onset-segment", "--seed", "--fixed-start"}},
      {"eval",
       {"--out", "--study", "--trajectory", "--wind", "--magnitude", "--heading",
        "--magnitudes", "--gains-rl", "--policy", "--policy2", "--seeds", "--runs",
        "--seed", "--serial"}},
      {"plot", {"--out", "--log", "--kind"}},
  };
  for (const auto& c : cases) {
    const RunResult r = run_cli(std::string(c.cmd) + " --help");
    CHECK(r.exit_code == 0);
    for (const char* flag : c.flags) {
      INFO(c.cmd, " help should mention ", flag);
      CHECK(r.output.find(flag) != std::string::npos);
    }
  }
}

TEST_CASE("fly writes log, summary and manifest") {
  TempDir out("fly");
  const RunResult r = run_cli("fly --out " + out.str() + " --trajectory " +
                              data("traj_square.txt") + " --gains " +
                              data("gains_baseline.ini") + " --seed 2");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out.path / "flight_log.csv"));
  CHECK(fs::exists(out.path / "summary.ini"));
  CHECK(fs::exists(out.path / "manifest.json"));
  std::ifstream f(out.path / "manifest.json");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("flight_log.csv") != std::string::npos);
}

TEST_CASE("train --episodes 0 emits only the initial checkpoint") {
  TempDir out("train0");
  const RunResult r =
      run_cli("train --out " + out.str() + " --episodes 0 --seed 3 --gains " +
              data("gains_baseline.ini"));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out.path / "checkpoint.bin"));
  std::ifstream f(out.path / "curve.csv");
  std::string header, extra;
  std::getline(f, header);
  CHECK_FALSE(std::getline(f, extra));  // no update rows
}

TEST_CASE("plot rejects an empty log") {
  TempDir out("plotempty");
  const fs::path log = fs::temp_directory_path() / "uavrl_empty_log.csv";
  {
    std::ofstream f(log);
    f << "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,ref_x,ref_y,ref_z,reward_flag\n";
  }
  const RunResult r =
      run_cli("plot --out " + out.str() + " --log " + log.string() + " --kind flight");
  CHECK(r.exit_code == 1);
}

TEST_CASE("tune rejects a malformed space file with a line number") {
  const fs::path bad = fs::temp_directory_path() / "uavrl_bad_space.ini";
  {
    std::ofstream f(bad);
    f << "[search_space]\nposition.k_p = log_uniform 1\n";
  }
  TempDir out("badspace");
  const RunResult r = run_cli("tune --out " + out.str() + " --space " +
                              bad.string() + " --trials 2");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("position.k_p") != std::string::npos);
}

}  // TEST_SUITE
