#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PDCF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path out = fs::temp_directory_path() / "pdcf_cli_out";
  fs::remove_all(out);
  EXPECT_EQ(run("run --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_EQ(run("run --basis schmidt --threads 2 --seed 5 --out " + out.string()), 0);
  EXPECT_EQ(run("sweep --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "tradeoff.csv"));
  EXPECT_EQ(run("validate"), 0);

  EXPECT_EQ(run("run --config " + write_config("pdcf_bad.cfg", "nonsense = 1\n").string()), 1);
  EXPECT_EQ(run("run --basis nope"), 1);
  EXPECT_EQ(run("run --frobnicate"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("run --config " + write_config("pdcf_narrow.cfg", "omega_min = -10\nomega_max = 10\n").string()), 2);
  EXPECT_EQ(run("validate --config " + (fs::temp_directory_path() / "pdcf_narrow.cfg").string()), 2);
  EXPECT_EQ(run("run --config /nonexistent/x.cfg"), 3);
  const fs::path blocker = write_config("pdcf_blocker", "x");
  EXPECT_EQ(run("run --out " + (blocker / "sub").string()), 3);
  fs::remove_all(out);
}
