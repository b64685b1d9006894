#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CFBP_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("cfbp_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmall =
    "group = euclid1\nnodes = 128\nlambda = 47\nbeta = 0.05\ndelta = 0.5\neps0 = 0.2\nJ = 2\n";

}  // namespace

TEST_CASE("verify on the shipped config succeeds") {
  const fs::path d = scratch("verify");
  CHECK(run("verify --out " + d.string()) == 0);
  CHECK(fs::exists(d / "verify.txt"));
  CHECK(fs::exists(d / "stages.csv"));
  fs::remove_all(d);
}

TEST_CASE("config errors exit with 2") {
  const fs::path d = scratch("bad");
  write(d / "bad.cfg", "delta = 1.5\n");
  CHECK(run("solve --config " + (d / "bad.cfg").string() + " --out " + d.string()) == 2);
  write(d / "bad2.cfg", "nonsense = 1\n");
  CHECK(run("solve --config " + (d / "bad2.cfg").string() + " --out " + d.string()) == 2);
  CHECK(run("solve --config " + (d / "missing.cfg").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("solve --log-level loud") == 2);
  fs::remove_all(d);
}

TEST_CASE("runs are deterministic and tables carry the hash") {
  const fs::path d = scratch("det");
  write(d / "small.cfg", kSmall);
  const std::string cfg = " --config " + (d / "small.cfg").string();
  REQUIRE(run("continuation" + cfg + " --seed 5 --out " + (d / "a").string()) == 0);
  REQUIRE(run("continuation" + cfg + " --seed 5 --threads 2 --out " + (d / "b").string()) == 0);
  for (const char* f : {"stages.csv", "u0.csv", "u1.csv", "free_boundary.csv"}) {
    const std::string a = slurp(d / "a" / f);
    CHECK_MESSAGE(!a.empty(), f);
    CHECK_MESSAGE(a == slurp(d / "b" / f), f);
    CHECK(a.rfind("# ", 0) == 0);
    CHECK(a.substr(0, a.find('\n')).find("units:") != std::string::npos);
    CHECK(a.substr(0, a.find('\n')).find("config_hash=") != std::string::npos);
  }

  REQUIRE(run("eig" + cfg + " --out " + (d / "e").string()) == 0);
  CHECK(fs::exists(d / "e" / "eig.csv"));
  REQUIRE(run("singular" + cfg + " --out " + (d / "s").string()) == 0);
  CHECK(fs::exists(d / "s" / "u_beta.csv"));
  REQUIRE(run("oracle" + cfg + " --out " + (d / "o").string()) == 0);
  CHECK(fs::exists(d / "o" / "oracle.csv"));
  REQUIRE(run("solve" + cfg + " --out " + (d / "v").string()) == 0);
  CHECK(fs::exists(d / "v" / "solve.csv"));
  fs::remove_all(d);
}
