// Drives the installed CLI binary end to end. The binary path arrives via
// the DPART_CLI environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "dpart/csv.hpp"
#include "dpart/demo_data.hpp"
#include "dpart/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const char* cli = std::getenv("DPART_CLI");
  REQUIRE(cli != nullptr);
  fs::path errfile =
      fs::temp_directory_path() / ("dpart_cli_err_" + std::to_string(counter++));
  std::string cmd = std::string(cli) + " " + args + " 2>" + errfile.string();
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, n);
  int rc = pclose(pipe);
  result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  if (fs::exists(errfile)) {
    result.err = dpart::read_text_file(errfile.string());
    fs::remove(errfile);
  }
  return result;
}

struct Fixture {
  fs::path dir;
  std::string csv;
  std::string schema;

  Fixture() {
    dir = fs::temp_directory_path() / "dpart_cli_fixture";
    fs::create_directories(dir);
    dpart::Table demo = dpart::demo::adult_like(400, 33);
    csv = (dir / "demo.csv").string();
    schema = (dir / "schema.json").string();
    dpart::write_csv(demo, csv);
    dpart::atomic_write_text_file(schema, dpart::schema_to_json(demo.schema).dump());
  }
};

std::size_t count_lines(const std::string& path) {
  std::string text = dpart::read_text_file(path);
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("cli: fit without bounds warns about the privacy leak") {
  Fixture fx;
  std::string model = (fx.dir / "warn.dpart.json").string();
  auto r = run("fit --data " + fx.csv + " --schema " + fx.schema +
               " --engine independent --epsilon 1.0 --out " + model + " --seed 5");
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("WARNING: PrivacyLeakWarning") != std::string::npos);
  CHECK(fs::exists(model));
  // Exactly one warning line.
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("cli: unknown engine exits 2 and lists the valid ones") {
  Fixture fx;
  auto r = run("fit --data " + fx.csv + " --schema " + fx.schema +
               " --engine sorcery --out /tmp/x.json");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("independent") != std::string::npos);
  CHECK(r.err.find("privbayes") != std::string::npos);
  CHECK(r.err.find("dp-synthpop") != std::string::npos);
}

TEST_CASE("cli: seeded fit and generate reproduce byte-identical outputs") {
  Fixture fx;
  std::string m1 = (fx.dir / "m1.dpart.json").string();
  std::string m2 = (fx.dir / "m2.dpart.json").string();
  std::string bounds_flag = "";  // bounds inferred; seeded runs still match
  for (const auto& [model, csv_out] :
       {std::pair{m1, (fx.dir / "g1.csv").string()},
        std::pair{m2, (fx.dir / "g2.csv").string()}}) {
    auto rf = run("fit --data " + fx.csv + " --schema " + fx.schema +
                  " --engine privbayes --epsilon 1.0 --out " + model + " --seed 17");
    REQUIRE(rf.exit_code == 0);
    auto rg = run("generate --model " + model + " --rows 120 --out " + csv_out +
                  " --seed 99");
    REQUIRE(rg.exit_code == 0);
  }
  CHECK(dpart::read_text_file(m1) == dpart::read_text_file(m2));
  CHECK(dpart::read_text_file((fx.dir / "g1.csv").string()) ==
        dpart::read_text_file((fx.dir / "g2.csv").string()));
}

TEST_CASE("cli: generate writes header plus the requested rows") {
  Fixture fx;
  std::string model = (fx.dir / "rows.dpart.json").string();
  REQUIRE(run("fit --data " + fx.csv + " --schema " + fx.schema +
              " --engine independent --out " + model + " --seed 3")
              .exit_code == 0);
  std::string out = (fx.dir / "rows.csv").string();
  auto r = run("generate --model " + model + " --rows 1000 --out " + out + " --seed 4");
  CHECK(r.exit_code == 0);
  CHECK(count_lines(out) == 1001);
}

TEST_CASE("cli: generate rejects a zero row count") {
  Fixture fx;
  std::string model = (fx.dir / "zr.dpart.json").string();
  REQUIRE(run("fit --data " + fx.csv + " --schema " + fx.schema +
              " --engine independent --out " + model + " --seed 3")
              .exit_code == 0);
  auto r = run("generate --model " + model + " --rows 0 --out /tmp/zzz.csv");
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: corrupt model file exits 1") {
  Fixture fx;
  std::string broken = (fx.dir / "broken.dpart.json").string();
  dpart::atomic_write_text_file(broken, "{\"checksum\":\"beef\",\"model\":{\"format_version\":99}}");
  auto r = run("generate --model " + broken + " --rows 5 --out /tmp/zzz2.csv");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("unsupported") != std::string::npos);
}

TEST_CASE("cli: evaluate identical files reports similarity one") {
  Fixture fx;
  auto r = run("evaluate --real " + fx.csv + " --synth " + fx.csv + " --schema " +
               fx.schema + " --target income");
  CHECK(r.exit_code == 0);
  auto metrics = nlohmann::json::parse(r.out);
  CHECK(metrics.at("similarity").get<double>() == doctest::Approx(1.0));
  CHECK(metrics.contains("accuracy"));
}

TEST_CASE("cli: evaluate without --target exits 2") {
  Fixture fx;
  auto r = run("evaluate --real " + fx.csv + " --synth " + fx.csv + " --schema " +
               fx.schema);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("--target") != std::string::npos);
}

TEST_CASE("cli: experiment writes a deterministic report") {
  Fixture fx;
  std::string cfg = (fx.dir / "exp.json").string();
  dpart::atomic_write_text_file(cfg, std::string("{\n") +
      "\"data\": \"" + fx.csv + "\",\n" +
      "\"schema\": \"" + fx.schema + "\",\n" +
      "\"target\": \"income\",\n" +
      "\"engines\": [\"independent\", \"privbayes\"],\n" +
      "\"epsilons\": [0.5, 5.0],\n" +
      "\"fits\": 2,\n\"generations\": 2,\n\"master_seed\": 12\n}");
  std::string out1 = (fx.dir / "out1").string();
  std::string out2 = (fx.dir / "out2").string();
  REQUIRE(run("experiment --config " + cfg + " --out-dir " + out1).exit_code == 0);
  REQUIRE(run("experiment --config " + cfg + " --out-dir " + out2).exit_code == 0);
  std::string report1 = dpart::read_text_file(out1 + "/report.csv");
  CHECK(report1 == dpart::read_text_file(out2 + "/report.csv"));
  // header + 2 engines x 2 epsilons x 2 fits x 2 gens + baseline
  CHECK(std::count(report1.begin(), report1.end(), '\n') == 1 + 16 + 1);
  CHECK(fs::exists(out1 + "/summary.json"));
}

TEST_CASE("cli: experiment config missing its data path exits 2 naming the field") {
  Fixture fx;
  std::string cfg = (fx.dir / "bad.json").string();
  dpart::atomic_write_text_file(cfg,
      "{\"schema\": \"" + fx.schema + "\", \"target\": \"income\"}");
  auto r = run("experiment --config " + cfg + " --out-dir /tmp/nope");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("data") != std::string::npos);
}

TEST_CASE("cli: failed generate leaves no partial output file") {
  Fixture fx;
  std::string model = (fx.dir / "np.dpart.json").string();
  REQUIRE(run("fit --data " + fx.csv + " --schema " + fx.schema +
              " --engine independent --out " + model + " --seed 3")
              .exit_code == 0);
  std::string out = (fx.dir / "missing_dir" / "out.csv").string();
  auto r = run("generate --model " + model + " --rows 10 --out " + out);
  CHECK(r.exit_code == 1);
  CHECK_FALSE(fs::exists(out));
}
