// Exercises the public C API and the CLI binary end to end.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <doctest.h>

#include "hrcount.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / "hrc_capi_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

struct Opts {
  hrc_options* o = hrc_options_create();
  ~Opts() { hrc_options_destroy(o); }
  // tiny model + tiny run so tests stay fast
  void shrink() {
    REQUIRE(hrc_options_set(o, "block_channels", "4,6,8,8") == HRC_OK);
    REQUIRE(hrc_options_set(o, "epochs", "1") == HRC_OK);
    REQUIRE(hrc_options_set(o, "passes_per_epoch", "1") == HRC_OK);
    REQUIRE(hrc_options_set(o, "count_max", "5") == HRC_OK);
    REQUIRE(hrc_options_set(o, "val_fraction", "0.25") == HRC_OK);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HRC_CLI_PATH) + " " + args +
                          " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// A trained checkpoint + dataset shared by several cases, built once.
struct Fixture {
  fs::path data = fresh_dir("fix_data");
  fs::path run = fresh_dir("fix_run");
  Fixture() {
    Opts opts;
    opts.shrink();
    REQUIRE(hrc_generate_dataset(opts.o, data.string().c_str(), 6) == HRC_OK);
    char summary[256] = {0};
    REQUIRE(hrc_train(opts.o, data.string().c_str(), run.string().c_str(),
                      summary, sizeof(summary)) == HRC_OK);
    REQUIRE(std::string(summary).find("val MAE") != std::string::npos);
  }
  std::string ckpt() const {
    return (run / "checkpoint.hrc").string();
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("options: unknown keys and bad values are config errors") {
  Opts opts;
  CHECK(hrc_options_set(opts.o, "no_such_key", "1") == HRC_ERR_CONFIG);
  CHECK(std::string(hrc_last_error()).find("no_such_key") !=
        std::string::npos);
  CHECK(hrc_options_set(opts.o, "epochs", "banana") == HRC_ERR_CONFIG);
  CHECK(hrc_options_set(opts.o, "epochs", "3") == HRC_OK);
  CHECK(std::string(hrc_last_error()).empty());

  CHECK(hrc_options_set(nullptr, "epochs", "3") == HRC_ERR_ARG);
  CHECK(hrc_options_load_file(opts.o, "/nonexistent.cfg") != HRC_OK);
}

TEST_CASE("options: config file parsing") {
  const fs::path dir = fresh_dir("cfg");
  {
    std::ofstream f(dir / "good.cfg");
    f << "# comment line\n\nepochs = 2\nlambda_hr=0.5\n";
  }
  {
    std::ofstream f(dir / "bad.cfg");
    f << "epochs 2\n";  // missing '='
  }
  Opts opts;
  CHECK(hrc_options_load_file(opts.o, (dir / "good.cfg").string().c_str()) ==
        HRC_OK);
  CHECK(hrc_options_load_file(opts.o, (dir / "bad.cfg").string().c_str()) ==
        HRC_ERR_CONFIG);
}

TEST_CASE("full pipeline through the C API") {
  Fixture& f = fixture();
  CHECK(fs::exists(f.run / "checkpoint.hrc"));
  CHECK(fs::exists(f.run / "report.json"));
  CHECK(fs::exists(f.run / "curves.csv"));

  Opts opts;
  const fs::path json = fresh_dir("eval") / "eval.json";
  char csv[4096] = {0};
  REQUIRE(hrc_evaluate(opts.o, f.ckpt().c_str(), f.data.string().c_str(),
                       json.string().c_str(), csv, sizeof(csv)) == HRC_OK);
  const std::string header = "method,MAE,RMSE,%O,%U,%D,cam_mass_ratio\n";
  CHECK(std::string(csv).rfind(header, 0) == 0);
  CHECK(std::string(csv).substr(header.size(), 3) == "hr,");

  // eval.json repeats the CSV's printed numbers
  const std::string j = slurp(json);
  const std::string row = std::string(csv).substr(header.size());
  const std::string mae = row.substr(3, row.find(',', 3) - 3);
  const auto pos = j.find("\"mae\": ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(j.substr(pos + 7)) ==
        doctest::Approx(std::stod(mae)).epsilon(1e-12));

  // render both map flavors
  const fs::path out = fresh_dir("render");
  CHECK(hrc_render_cam(opts.o, f.ckpt().c_str(),
                       (f.data / "images" / "s00000.png").string().c_str(),
                       (out / "cam.png").string().c_str()) == HRC_OK);
  CHECK(hrc_render_gam(opts.o, f.data.string().c_str(), "s00000",
                       (out / "gam.png").string().c_str()) == HRC_OK);
  CHECK(fs::file_size(out / "cam.png") > 0);
  CHECK(fs::file_size(out / "gam.png") > 0);
  CHECK(hrc_render_gam(opts.o, f.data.string().c_str(), "nope",
                       (out / "x.png").string().c_str()) == HRC_ERR_RUNTIME);
}

TEST_CASE("direct model handle") {
  Fixture& f = fixture();
  CHECK(hrc_model_load("/nonexistent.hrc") == nullptr);
  CHECK(std::string(hrc_last_error()).size() > 0);

  hrc_model* m = hrc_model_load(f.ckpt().c_str());
  REQUIRE(m != nullptr);
  std::vector<double> img(64 * 64, 0.0);
  double count = -1;
  CHECK(hrc_model_count(m, img.data(), 64, 64, &count) == HRC_OK);
  CHECK(count == count);  // finite
  CHECK(hrc_model_count(m, img.data(), 63, 64, &count) == HRC_ERR_RUNTIME);
  CHECK(hrc_model_count(nullptr, img.data(), 64, 64, &count) == HRC_ERR_ARG);
  hrc_model_destroy(m);
}

TEST_CASE("error codes map to error kinds") {
  Opts opts;
  CHECK(hrc_generate_dataset(opts.o, "/proc/denied/x", 2) == HRC_ERR_IO);
  hrc_options_set(opts.o, "count_min", "9");
  hrc_options_set(opts.o, "count_max", "3");
  CHECK(hrc_generate_dataset(opts.o, fresh_dir("bad").string().c_str(), 2) ==
        HRC_ERR_CONFIG);
  Opts opts2;
  char csv[64];
  CHECK(hrc_evaluate(opts2.o, "/nonexistent.hrc", "/nonexistent", nullptr,
                     csv, sizeof(csv)) == HRC_ERR_IO);
}

TEST_CASE("CLI exit codes") {
  // usage errors -> 2
  CHECK(run_cli("") == 2);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("gen-data") == 2);           // missing required flags
  CHECK(run_cli("frobnicate --fast") == 2);
  // runtime/config errors -> 1
  CHECK(run_cli("eval --checkpoint /none.hrc --data /none") == 1);
  CHECK(run_cli("--set bad_key=1 gen-data --out /tmp/hrc_cli_x --n 1") == 1);
  // success -> 0
  const fs::path d = fresh_dir("cli_ok");
  CHECK(run_cli("gen-data --out " + d.string() + " --n 2 --seed 3") == 0);
  CHECK(fs::exists(d / "images" / "s00001.png"));
}

TEST_CASE("CLI end-to-end determinism") {
  const fs::path d1 = fresh_dir("cli_det1"), d2 = fresh_dir("cli_det2");
  const std::string common =
      "--set block_channels=4,6,8,8 --set epochs=1 "
      "--set passes_per_epoch=1 --set count_max=5 --set val_fraction=0.25";
  for (const fs::path* d : {&d1, &d2}) {
    CHECK(run_cli("gen-data --out " + (*d / "data").string() +
                  " --n 6 --seed 12") == 0);
    CHECK(run_cli(common + " train --data " + (*d / "data").string() +
                  " --out " + (*d / "run").string()) == 0);
    CHECK(run_cli(common + " eval --checkpoint " +
                  (*d / "run" / "checkpoint.hrc").string() + " --data " +
                  (*d / "data").string() + " --json " +
                  (*d / "eval.json").string()) == 0);
  }
  for (const char* rel :
       {"data/images/s00003.png", "data/annotations.jsonl",
        "run/checkpoint.hrc", "run/report.json", "run/curves.csv",
        "eval.json"}) {
    CHECK(slurp(d1 / rel) == slurp(d2 / rel));
    CHECK(fs::file_size(d1 / rel) > 0);
  }
}
