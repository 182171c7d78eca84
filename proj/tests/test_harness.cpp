#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "loopsoup/acceptance.hpp"
#include "loopsoup/harness.hpp"

using namespace loopsoup;
namespace fs = std::filesystem;

TEST_CASE("config grammar") {
  const Config c = Config::parse(
      "# run\n"
      "n = 8\n"
      "  u=0.25   # intensity\n"
      "mode = \"metric # vertex\"\n"
      "\n"
      "n = 16\n");
  CHECK(c.get_int("n", 0) == 16);
  CHECK(c.get_double("u", 0) == 0.25);
  CHECK(c.get_string("mode", "") == "metric # vertex");
  CHECK(c.get_double("missing", 1.5) == 1.5);
  CHECK(c.to_json()["n"] == 16);
  CHECK_THROWS_AS(Config::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("bad key = 1\n"), ConfigError);
}

TEST_CASE("typed getters name the field") {
  Config c = Config::parse("samples = 1e4\nseed = -3\nflag = maybe\n");
  CHECK(c.get_int("samples", 0) == 10000);
  try {
    c.get_uint("seed", 0);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config.seed") != std::string::npos);
  }
  CHECK_THROWS_AS(c.get_bool("flag", false), ConfigError);
  c.set("samples", "2.5");
  CHECK_THROWS_AS(c.get_int("samples", 0), ConfigError);
  CHECK_THROWS_AS(c.require_known({"seed", "flag"}), ConfigError);
  CHECK_NOTHROW(c.require_known({"seed", "flag", "samples"}));
}

TEST_CASE("git blob hashes") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  const std::map<std::string, std::string> a{{"x.csv", "1\n"}, {"y.csv", "2\n"}};
  auto b = a;
  CHECK(content_hash(a) == content_hash(b));
  b["y.csv"] = "3\n";
  CHECK(content_hash(a) != content_hash(b));
  std::map<std::string, std::string> renamed{{"x.csv", "1\n"}, {"z.csv", "2\n"}};
  CHECK(content_hash(a) != content_hash(renamed));
}

TEST_CASE("artifacts: commit writes a manifest, failure leaves nothing") {
  const fs::path dir = fs::temp_directory_path() / "loopsoup_test_artifacts";
  fs::remove_all(dir);
  std::string hash;
  {
    ArtifactSet out(dir);
    out.open("a.csv") << "x,y\n1,2\n";
    hash = out.commit({{"subcommand", "test"}});
  }
  CHECK(fs::exists(dir / "a.csv"));
  std::ifstream in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["content_hash"] == hash);
  CHECK(m["schema_version"] == kSchemaVersion);
  CHECK(m["files"][0]["name"] == "a.csv");
  {
    ArtifactSet again(dir / "second");
    again.open("a.csv") << "x,y\n1,2\n";
    CHECK(again.hash() == hash);
    // Dropped before commit: nothing is written.
  }
  CHECK(!fs::exists(dir / "second" / "a.csv"));
  ArtifactSet bad(dir);
  CHECK_THROWS(bad.open("manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("conditional law catches a tampered edge rule") {
  const ConditionalLaw good = conditional_law(40000, 3, 10);
  double zmax = 0;
  for (const auto& b : good.bins) zmax = std::max(zmax, std::abs(b.z));
  CHECK(zmax < 4);
  const EdgeRule tampered = [](double c, double a, double b) { return -std::expm1(-2 * c * std::abs(a * b)); };
  const ConditionalLaw bad = conditional_law(40000, 3, 10, tampered);
  double zbad = 0;
  for (const auto& b : bad.bins) zbad = std::max(zbad, std::abs(b.z));
  CHECK(zbad > 5);
}

TEST_CASE("criterion dispatch") {
  AcceptanceOptions opt;
  opt.level = Level::fast;
  const CriterionResult r = run_criterion(8, opt);
  CHECK(r.pass);
  CHECK(summary_line(r).rfind("criterion 8 PASS", 0) == 0);
  CHECK_THROWS(run_criterion(11, opt));
  CHECK(level_from_string("fast") == Level::fast);
  CHECK_THROWS(level_from_string("slow"));
}
