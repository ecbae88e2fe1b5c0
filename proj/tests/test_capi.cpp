#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "dpart.h"
#include "dpart/csv.hpp"
#include "dpart/demo_data.hpp"
#include "dpart/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  std::string csv;
  std::string schema;

  Fixture() {
    dir = fs::temp_directory_path() / "dpart_capi_test";
    fs::create_directories(dir);
    dpart::Table demo = dpart::demo::adult_like(300, 21);
    csv = (dir / "demo.csv").string();
    schema = (dir / "schema.json").string();
    dpart::write_csv(demo, csv);
    dpart::atomic_write_text_file(schema,
                                  dpart::schema_to_json(demo.schema).dump());
  }
};

}  // namespace

TEST_CASE("c api: version and error text") {
  CHECK(std::strlen(dpart_version()) > 0);
  dpart_table* out = nullptr;
  CHECK(dpart_table_read_csv("/nonexistent.csv", "/nonexistent.json", &out) ==
        DPART_ERR_IO);
  CHECK(std::strlen(dpart_last_error()) > 0);
  CHECK(dpart_table_read_csv(nullptr, nullptr, nullptr) == DPART_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: fit, warnings, generate, save, load") {
  Fixture fx;
  dpart_table* table = nullptr;
  REQUIRE(dpart_table_read_csv(fx.csv.c_str(), fx.schema.c_str(), &table) == DPART_OK);
  CHECK(dpart_table_rows(table) == 300);
  CHECK(dpart_table_cols(table) == 6);

  // Epsilon without bounds: fit succeeds with a privacy-leak warning.
  dpart_model* model = nullptr;
  REQUIRE(dpart_fit(table, R"({"engine":"independent","epsilon":1.0})", 42, 1,
                    &model) == DPART_OK);
  REQUIRE(dpart_model_warning_count(model) == 1);
  CHECK(std::string(dpart_model_warning(model, 0)).find("PrivacyLeak") !=
        std::string::npos);
  CHECK(dpart_model_warning(model, 5) == nullptr);

  dpart_table* synth = nullptr;
  REQUIRE(dpart_generate(model, 150, 7, 1, &synth) == DPART_OK);
  CHECK(dpart_table_rows(synth) == 150);

  std::string model_path = (fx.dir / "m.dpart.json").string();
  REQUIRE(dpart_model_save(model, model_path.c_str()) == DPART_OK);
  dpart_model* loaded = nullptr;
  REQUIRE(dpart_model_load(model_path.c_str(), &loaded) == DPART_OK);

  dpart_table* synth2 = nullptr;
  REQUIRE(dpart_generate(loaded, 150, 7, 1, &synth2) == DPART_OK);
  std::string out1 = (fx.dir / "s1.csv").string();
  std::string out2 = (fx.dir / "s2.csv").string();
  REQUIRE(dpart_table_write_csv(synth, out1.c_str()) == DPART_OK);
  REQUIRE(dpart_table_write_csv(synth2, out2.c_str()) == DPART_OK);
  CHECK(dpart::read_text_file(out1) == dpart::read_text_file(out2));

  dpart_table_free(synth);
  dpart_table_free(synth2);
  dpart_model_free(model);
  dpart_model_free(loaded);
  dpart_table_free(table);
}

TEST_CASE("c api: invalid specs map to argument errors") {
  Fixture fx;
  dpart_table* table = nullptr;
  REQUIRE(dpart_table_read_csv(fx.csv.c_str(), fx.schema.c_str(), &table) == DPART_OK);
  dpart_model* model = nullptr;
  CHECK(dpart_fit(table, R"({"engine":"nope"})", 0, 0, &model) ==
        DPART_ERR_INVALID_ARGUMENT);
  CHECK(std::string(dpart_last_error()).find("privbayes") != std::string::npos);
  CHECK(dpart_fit(table, "{not json", 0, 0, &model) == DPART_ERR_PARSE);
  dpart_table_free(table);
}

TEST_CASE("c api: corrupt model file maps to a format error") {
  Fixture fx;
  std::string path = (fx.dir / "broken.dpart.json").string();
  dpart::atomic_write_text_file(path, "{\"checksum\":\"0\",\"model\":{}}");
  dpart_model* model = nullptr;
  CHECK(dpart_model_load(path.c_str(), &model) == DPART_ERR_FORMAT);
}

TEST_CASE("c api: evaluate returns metrics JSON") {
  Fixture fx;
  dpart_table* real = nullptr;
  REQUIRE(dpart_table_read_csv(fx.csv.c_str(), fx.schema.c_str(), &real) == DPART_OK);
  char* metrics = nullptr;
  REQUIRE(dpart_evaluate(real, real, "income", &metrics) == DPART_OK);
  std::string text = metrics;
  dpart_string_free(metrics);
  CHECK(text.find("\"similarity\":1.0") != std::string::npos);
  CHECK(text.find("\"accuracy\"") != std::string::npos);

  char* bad = nullptr;
  CHECK(dpart_evaluate(real, real, "missing-col", &bad) == DPART_ERR_INVALID_ARGUMENT);
  dpart_table_free(real);
}

TEST_CASE("c api: experiment run writes the report files") {
  Fixture fx;
  std::string cfg_path = (fx.dir / "exp.json").string();
  std::string out_dir = (fx.dir / "out").string();
  dpart::atomic_write_text_file(cfg_path, std::string(R"({
    "data": ")") + fx.csv + R"(",
    "schema": ")" + fx.schema + R"(",
    "target": "income",
    "engines": ["independent"],
    "epsilons": [1.0],
    "fits": 1,
    "generations": 2,
    "master_seed": 3
  })");
  REQUIRE(dpart_experiment_run(cfg_path.c_str(), out_dir.c_str()) == DPART_OK);
  CHECK(fs::exists(fs::path(out_dir) / "report.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "summary.json"));

  CHECK(dpart_experiment_run((fx.dir / "nope.json").string().c_str(),
                             out_dir.c_str()) == DPART_ERR_IO);
}
