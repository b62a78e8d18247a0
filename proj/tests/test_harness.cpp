#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "jcindex/csv.hpp"
#include "jcindex/error.hpp"
#include "jcindex/harness.hpp"
#include "jcindex/synth.hpp"

using namespace jcindex;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr folded away; returns exit status and stdout.
Run cli(const std::string& args) {
  const std::string cmd = std::string(JCINDEX_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("jcindex_harness_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

RunConfig config_of(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::parse(in);
}

// (T,D) = (1,1),(2,2),(3,1) with covariates making the EXP model predict
// 1, 2, 2: the three-subject hand example.
const char* kHandCsv =
    "id,time,event,x\n"
    "a,1,1,2.0\n"
    "b,2,2,0.0\n"
    "c,3,1,-3.0\n";

}  // namespace

TEST_CASE("config parsing and overrides") {
  auto c = config_of("# comment\n\nquantile = 0.5\nseed=3\nquantile=0.6\n");
  CHECK(c.get("quantile") == "0.6");
  CHECK(c.get_uint("seed") == 3);
  c.set("data", "x.csv");
  c.set("seed", "9");
  const auto r = resolve_config("evaluate", c);
  CHECK(r.get_uint("seed") == 9);
  CHECK(r.get("model") == "exp");
  CHECK(r.get_double("quantile") == 0.6);
  CHECK(config_of("sizes=1000, 5000\n").get_doubles("sizes") == std::vector<double>{1000, 5000});
  CHECK_THROWS_AS(config_of("novalue\n"), Error);
  CHECK_THROWS_AS(config_of("x=abc\n").get_double("x"), Error);
  CHECK_THROWS_AS(config_of("b=maybe\n").get_bool("b"), Error);
}

TEST_CASE("unknown keys and missing data are usage errors") {
  try {
    resolve_config("evaluate", config_of("data=a.csv\nbogus=1\n"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  CHECK_THROWS_AS(resolve_config("evaluate", RunConfig{}), Error);
  CHECK_THROWS_AS(resolve_config("nonsense", RunConfig{}), Error);
  CHECK_THROWS_AS(resolve_config("simulate-table1", config_of("format=xml\n")), Error);
}

TEST_CASE("evaluate on the hand example") {
  const auto data = write_file("hand.csv", kHandCsv);
  const auto artifact = run_command("evaluate", resolve_config("evaluate", config_of("data=" + data.string() + "\nhorizon=10\n")));
  CHECK(artifact["command"] == "evaluate");
  CHECK(artifact["config"]["horizon"] == "10");
  const auto& report = artifact["result"]["report"];
  CHECK(report["joint_concordance"].get<double>() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(artifact["result"]["estimator"] == "uncensored");
  CHECK(!render_table(artifact).empty());
}

TEST_CASE("CLI output is byte-identical to the library") {
  SynthConfig cfg;
  cfg.n = 300;
  cfg.seed = 12;
  cfg.lambda0 = 2.0;
  const auto data = scratch() / "cohort.csv";
  write_csv_file(data.string(), generate(cfg));

  const std::string settings = "data=" + data.string() + "\nbootstrap=100\nseed=5\n";
  const auto lib = dump(run_command("evaluate", resolve_config("evaluate", config_of(settings))));
  const auto cfg_file = write_file("eval.cfg", settings);
  const auto run = cli("evaluate --config " + cfg_file.string());
  CHECK(run.status == 0);
  CHECK(run.out == lib);

  // flags override the file
  const auto flagged = cli("evaluate --config " + cfg_file.string() + " --seed 6");
  auto c6 = config_of(settings);
  c6.set("seed", "6");
  CHECK(flagged.out == dump(run_command("evaluate", resolve_config("evaluate", c6))));
  CHECK(flagged.out != lib);

  const auto out_file = scratch() / "eval.json";
  CHECK(cli("evaluate --config " + cfg_file.string() + " --output " + out_file.string()).status == 0);
  std::ifstream in(out_file);
  std::stringstream written;
  written << in.rdbuf();
  auto with_output = config_of(settings);
  with_output.set("output", out_file.string());
  CHECK(written.str() == dump(run_command("evaluate", resolve_config("evaluate", with_output))));

  // fitted model round trip through a file
  const auto fit = cli("fit --data " + data.string());
  CHECK(fit.status == 0);
  const auto model_file = write_file("model.json", fit.out);
  const auto csc = cli("evaluate --data " + data.string() + " --model csc --model-file " + model_file.string());
  CHECK(csc.status == 0);
  auto cc = config_of("data=" + data.string() + "\nmodel=csc\n");
  const auto direct = run_command("evaluate", resolve_config("evaluate", cc));
  CHECK(json::parse(csc.out)["result"]["report"] == direct["result"]["report"]);
}

TEST_CASE("simulate writes the same CSV as the library") {
  const auto out = scratch() / "sim.csv";
  const auto run = cli("simulate --n 250 --seed 4 --censoring 0.5 --output " + out.string());
  CHECK(run.status == 0);
  SynthConfig cfg;
  cfg.n = 250;
  cfg.seed = 4;
  cfg.lambda0 = calibrate_censoring_rate(0.5, cfg);
  std::ostringstream lib;
  write_csv(lib, generate(cfg));
  std::ifstream in(out);
  std::stringstream file;
  file << in.rdbuf();
  CHECK(file.str() == lib.str());
  CHECK(cli("simulate --n 10").status == 1);
}

TEST_CASE("exit codes") {
  const auto censored = write_file("censored.csv", "id,time,event,x\na,1,0,0.5\nb,2,0,0.1\n");
  const auto r = cli("evaluate --data " + censored.string());
  CHECK(r.status == 2);
  CHECK(cli("evaluate --data " + censored.string() + " --bogus 1").status == 1);
  CHECK(cli("evaluate --data " + (scratch() / "nope.csv").string()).status == 2);
  CHECK(cli("frobnicate").status == 1);
  const auto hand = write_file("hand.csv", kHandCsv);
  CHECK(cli("evaluate --data " + hand.string() + " --horizon 0.1").status == 3);
  const auto bad_cfg = write_file("bad.cfg", "data=x.csv\nunknown_key=3\n");
  CHECK(cli("evaluate --config " + bad_cfg.string()).status == 1);

  std::string out;
  try {
    read_csv_file(censored.string());
  } catch (const Error& e) {
    out = dump(error_json(e));
  }
  CHECK(json::parse(out)["error"] == "NoEventsOfType");
}

TEST_CASE("two-replicate efficiency study satisfies the RMSE identity") {
  EfficiencyOptions o;
  o.censoring = {0.5};
  o.sizes = {200};
  o.replicates = 2;
  const auto rep = efficiency_study(o);
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  CHECK(row.used == 2);
  CHECK(std::fabs(row.rmse * row.rmse - (row.se * row.se + row.bias * row.bias)) < 1e-15);
  const auto again = efficiency_study(o);
  CHECK(again.rows[0].estimates == row.estimates);

  const auto artifact = run_command("simulate-table1", resolve_config("simulate-table1",
                                                                    config_of("censoring=0.5\nsizes=200\nreplicates=2\n")));
  CHECK(artifact["result"]["rows"][0]["estimates"] == json(row.estimates));
  const auto text = render_table(artifact);
  CHECK(text.find("RMSE") != std::string::npos);
}

TEST_CASE("small comparison table is deterministic") {
  ComparisonOptions o;
  o.n = 2000;
  const auto a = to_json(model_comparison(o));
  const auto b = to_json(model_comparison(o));
  CHECK(dump(a) == dump(b));
  CHECK(a["rows"].size() == 2);
  CHECK(a["rows"][1]["model"] == "CSC");
  const auto artifact = run_command("simulate-table2", resolve_config("simulate-table2", config_of("n=2000\n")));
  CHECK(artifact["result"]["rows"] == a["rows"]);
  CHECK(!render_table(artifact).empty());
}

TEST_CASE("rank-variables") {
  const auto single = scratch() / "single.csv";
  SynthConfig cfg;
  cfg.n = 200;
  write_csv_file(single.string(), generate(cfg));
  const auto artifact =
      run_command("rank-variables", resolve_config("rank-variables", config_of("data=" + single.string() + "\n")));
  CHECK(artifact["result"]["rankings"].size() == 2);
  CHECK(artifact["result"]["rankings"][0]["warnings"].size() == 1);

  const auto three = scratch() / "three.csv";
  write_csv_file(three.string(), generate_linear(event_specific_design(), 400, 2));
  const auto run = cli("rank-variables --data " + three.string() + " --format table");
  CHECK(run.status == 0);
  CHECK(run.out.find("stepwise_cr") != std::string::npos);
  CHECK(run.out.find("stepwise_lumped") != std::string::npos);
}
