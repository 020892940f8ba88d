#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mhdbl/cli.hpp"
#include "mhdbl/errors.hpp"

using namespace mhdbl;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# coarse zero-mismatch run
profile = zero-mismatch
[grid]
nx = 16
ny = 64
nY = 32
[params]
eps = 0.01
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("canonical form round-trips byte for byte") {
  auto c = parse_config("profile = mild\nparams.eps = 0.003\nstudy.eps = 0.04, 0.01, 0.004, 0.001\ngrid.stretch = 1.1\n");
  CHECK(c.params.eps == 0.003);
  CHECK(c.eps_sweep.size() == 4);
  const auto text = canonical(c);
  CHECK(canonical(parse_config(text)) == text);
  CHECK(config_hash(parse_config(text)) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("hash depends on values but not on layout or comments") {
  auto a = parse_config("profile = mild\n[params]\neps = 0.01\n");
  auto b = parse_config("# comment\nparams.eps = 1e-2\nprofile = mild\n");
  CHECK(config_hash(a) == config_hash(b));
  b.params.eps = 0.02;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("malformed configurations are rejected") {
  CHECK_THROWS_AS(parse_config("params.eps = 0.01\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = mild\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = mild\nparams.eps = 0.01\nparams.eps = 0.02\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = mild\ngrid.nx = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = mild\nparams.eps = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = mild\njust text\n"), ConfigError);
  auto c = parse_config("profile = mild\ntables.u0e = /nonexistent/table.dat\n");
  CHECK_THROWS_AS(to_pipeline(c), DependencyMissing);
}

TEST_CASE("validate on the zero-mismatch profile passes and reruns are byte-identical") {
  const fs::path out = fs::temp_directory_path() / "mhdbl_cli_test";
  fs::remove_all(out);
  const auto c = parse_config(kSmall);
  std::ostringstream log;
  CHECK(run_subcommand("validate", c, {out.string(), 1, true, true}, log) == 0);
  const fs::path dir = out / config_hash(c) / "validate";
  const auto v = nlohmann::json::parse(slurp(dir / "validation.json"));
  CHECK(v.at("all_pass").get<bool>());
  const auto first = slurp(dir / "validation.json");
  const auto manifest = slurp(dir / "manifest.json");
  CHECK(run_subcommand("validate", c, {out.string(), 1, true, true}, log) == 0);
  CHECK(slurp(dir / "validation.json") == first);
  CHECK(slurp(dir / "manifest.json") == manifest);
  CHECK(slurp(dir / "config.txt") == canonical(c));
  CHECK_THROWS_AS(run_subcommand("nope", c, {out.string()}, log), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("strict mode reports violated checks with exit code 3") {
  const fs::path out = fs::temp_directory_path() / "mhdbl_cli_strict";
  fs::remove_all(out);
  auto c = parse_config("profile = mild\ngrid.nx = 16\ngrid.ny = 64\ngrid.nY = 32\n");
  std::ostringstream log;
  // The magnetic multiplier check does not hold on the solved remainder.
  CHECK(run_subcommand("remainder", c, {out.string(), 1, true, true}, log) == 3);
  CHECK(run_subcommand("remainder", c, {out.string(), 1, false, false}, log) == 0);
  const fs::path dir = out / config_hash(c) / "remainder";
  CHECK(fs::exists(dir / "picard.csv"));
  CHECK(slurp(dir / "picard.csv").rfind("iteration,normS,delta\n", 0) == 0);
  fs::remove_all(out);
}
