#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "carnot_fbp/config.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/io.hpp"

using namespace cfbp;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const RunConfig c = parse_config_text("group = euclid2\n");
  CHECK(c.group == GroupKind::euclid2);
  CHECK(c.nodes == std::vector<int>{65, 65});
  CHECK(c.lo == Point{0.0, 0.0});
  CHECK(c.hi == Point{1.0, 1.0});
  CHECK(c.eps0 == 0.2);
  CHECK(c.J == 6);
  CHECK(c.schedule().size() == 7);

  const RunConfig h = parse_config_text("[domain]\ngroup = heis1\nnodes = 17\n");
  CHECK(h.nodes == std::vector<int>{17, 17, 17});
}

TEST_CASE("range errors name the admissible interval") {
  CHECK(error_of("delta = 1.5\n").find("0<delta<1") != std::string::npos);
  CHECK(error_of("p = 2.5\n").find("1<p<2") != std::string::npos);
  CHECK(!error_of("J = -1\n").empty());
  CHECK(!error_of("log_level = loud\n").empty());
}

TEST_CASE("syntax errors carry the line") {
  CHECK(error_of("# c\n\nlambda = 3\nfoo = 1\n").find("t.cfg:4") != std::string::npos);
  CHECK(error_of("lambda = 3\nlambda = 4\n").find("t.cfg:2") != std::string::npos);
  CHECK(error_of("[model]\nnodes = 5\n").find("t.cfg:2") != std::string::npos);
  CHECK(error_of("[nowhere]\n").find("t.cfg:1") != std::string::npos);
  CHECK(error_of("lambda = abc\n").find("t.cfg:1") != std::string::npos);
  CHECK(error_of("lambda\n").find("t.cfg:1") != std::string::npos);
}

TEST_CASE("round trip and hash") {
  const RunConfig a = parse_config_text("[model]\nlambda = 12.5\nbeta = 0.01\n[run]\nseed = 9\n");
  const RunConfig b = parse_config_text(a.to_text());
  CHECK(a.to_text() == b.to_text());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  RunConfig c = a;
  c.model.lambda = 12.6;
  CHECK(c.hash() != a.hash());
  RunConfig d = a;
  d.threads = 4;
  d.out = "elsewhere";
  CHECK(d.hash() == a.hash());
  // comments and layout do not change the hash
  CHECK(parse_config_text("; x\nlambda=12.5\nbeta = 0.01 # y\nseed = 9\n").hash() == a.hash());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("shipped default config parses") {
  const RunConfig c = parse_config(CFBP_DEFAULT_CONFIG);
  CHECK(c.group == GroupKind::euclid1);
  CHECK(c.nodes == std::vector<int>{512});
  CHECK_THROWS_AS(parse_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("tables") {
  Table t;
  t.title = "demo";
  t.units = "x in length units";
  t.config_hash = "0123456789abcdef";
  t.columns = {"a", "b"};
  t.add_row({1.0, 0.1});
  t.add_row({-2.5e-300, 1.0 / 3.0});
  CHECK_THROWS_AS(t.add_row({1.0}), InvalidArgument);
  std::ostringstream os;
  t.write(os);
  const std::string s = os.str();
  CHECK(s.rfind("# demo; units: x in length units; config_hash=0123456789abcdef\na,b\n", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "cfbp_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.csv").string();
  t.write(path);
  const Table r = read_table(path);
  CHECK(r.columns == t.columns);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1][0] == t.rows[1][0]);
  CHECK(r.rows[1][1] == t.rows[1][1]);
  CHECK(format_number(0.1) == "0.10000000000000001");

  auto g = std::make_shared<const Grid>(Point{0.0, 0.0}, Point{1.0, 1.0}, std::vector<int>{3, 3});
  const ScalarField u = ScalarField::from_function(g, [](const double* x) { return x[0] + 10 * x[1]; });
  write_field_csv((dir / "f.csv").string(), u, "h", "phi");
  const Table f = read_table((dir / "f.csv").string());
  CHECK(f.columns == std::vector<std::string>{"x1", "x2", "phi"});
  REQUIRE(f.rows.size() == 9);
  CHECK(f.rows[4][2] == doctest::Approx(5.5));
  std::filesystem::remove_all(dir);
}
