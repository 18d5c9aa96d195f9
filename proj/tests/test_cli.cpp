#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BLIGHT_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli: exit codes") {
  const fs::path out = fs::temp_directory_path() / "blight_cli_test";
  fs::remove_all(out);
  const std::string cfg = std::string(BLIGHT_CONFIGS) + "/check_baseline.ini";
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("check --bogus") == 2);
  CHECK(run("check --config /nonexistent.ini --out " + out.string()) == 2);
  CHECK(run("check --config " + cfg + " --out " + out.string()) == 0);
  CHECK(slurp(out / "check.csv").find("c_min,20\n") != std::string::npos);
}

TEST_CASE("cli: environment overrides and flag precedence") {
  const fs::path out = fs::temp_directory_path() / "blight_cli_env";
  fs::remove_all(out);
  const std::string cfg = std::string(BLIGHT_CONFIGS) + "/check_baseline.ini";
  CHECK(run("check --config " + cfg + " --out " + out.string() + " --seed 99") == 0);
  CHECK(slurp(out / "check.csv").find("# seed=99 ") != std::string::npos);
  CHECK(run("check --config " + cfg + " --out " + out.string() + " --seed 99 BLIGHT_UNUSED=1") == 2);
  const std::string env = "BLIGHT_SEED=7 BLIGHT_OUT=" + out.string() + " BLIGHT_CONFIG=" + cfg + " ";
  const std::string cmd = env + BLIGHT_EXE + " check >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(slurp(out / "check.csv").find("# seed=7 ") != std::string::npos);
}
