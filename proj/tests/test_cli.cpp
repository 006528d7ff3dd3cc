#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using doctest::String;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path("pcanatomy_cli_" + tag) {
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  std::string str() const { return path.string(); }
};

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string binary() {
  const char* bin = std::getenv("PC_ANATOMY_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PC_ANATOMY_BIN must point at the pc-anatomy binary");
  return bin;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  static int counter = 0;
  std::string out = "pcanatomy_cli_stdout_" + std::to_string(counter) + ".txt";
  std::string err = "pcanatomy_cli_stderr_" + std::to_string(counter) + ".txt";
  ++counter;
  std::string cmd = "'" + binary() + "' " + args + " > " + out + " 2> " + err;
  int ret = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(ret) ? WEXITSTATUS(ret) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  std::remove(out.c_str());
  std::remove(err.c_str());
  return r;
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
  RunResult v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("pc-anatomy 0.1.0") != std::string::npos);

  RunResult h = run("--help");
  CHECK(h.code == 0);
  CHECK(h.out.find("describe") != std::string::npos);
  CHECK(h.out.find("estimate") != std::string::npos);
  CHECK(h.out.find("simulate") != std::string::npos);
}

TEST_CASE("a subcommand is required") {
  RunResult r = run("");
  CHECK(r.code == 1);
}

TEST_CASE("simulate -> describe -> estimate round trip") {
  TempDir dir("roundtrip");
  std::string csv = dir.file("panel.csv");

  RunResult sim = run("simulate --out " + csv);
  CHECK(sim.code == 0);
  CHECK(sim.out.find("wrote: " + csv) != std::string::npos);
  CHECK(fs::exists(csv));
  CHECK(fs::exists(csv + ".manifest.json"));

  RunResult desc = run("describe --input " + csv + " --out-dir " + dir.str());
  CHECK(desc.code == 0);
  CHECK(desc.out.find("slack") != std::string::npos);
  CHECK(fs::exists(dir.file("describe_stats.csv")));

  RunResult est = run("estimate --input " + csv + " --model 1 --out-dir " + dir.str());
  CHECK(est.code == 0);
  CHECK(est.out.find("slack") != std::string::npos);
  CHECK(est.out.find("First-stage partial F") != std::string::npos);
  CHECK(fs::exists(dir.file("estimate_model1.json")));

  RunResult fig = run("figures --which 4 --input " + csv + " --out-dir " + dir.str());
  CHECK(fig.code == 0);
  CHECK(fs::exists(dir.file("fig4_slopes.csv")));
}

TEST_CASE("simulate presets") {
  TempDir dir("preset");
  std::string csv = dir.file("demo.csv");
  RunResult r = run("simulate --preset figure4 --out " + csv);
  CHECK(r.code == 0);
  CHECK(fs::exists(csv));

  RunResult bad = run("simulate --preset nope --out " + csv);
  CHECK(bad.code == 1);

  // --print-config dumps JSON and writes nothing.
  RunResult pc = run("simulate --preset figure4 --print-config --out " + dir.file("x.csv"));
  CHECK(pc.code == 0);
  CHECK(pc.out.find("\"agg_pi_load\"") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.file("x.csv")));
}

TEST_CASE("usage errors exit with code 1") {
  TempDir dir("usage");
  std::string csv = dir.file("panel.csv");
  REQUIRE(run("simulate --out " + csv).code == 0);

  CHECK(run("describe").code == 1);                                       // missing --input
  CHECK(run("describe --input " + csv + " --window 2020q1").code == 1);   // bad window
  CHECK(run("describe --input " + csv + " --split foo").code == 1);       // bad quarter
  CHECK(run("estimate --input " + csv + " --model 7").code == 1);         // bad model
  CHECK(run("figures --input " + csv + " --which 9").code == 1);          // unknown figure
  CHECK(run("figures --input " + csv + " --which 3").code == 1);          // no --msa
  CHECK(run("mc --reps 0").code == 1);

  // Config/preset conflicts and malformed config files.
  std::string cfg = dir.file("cfg.json");
  std::ofstream(cfg) << "{\"sigma_typo\": 1.0}";
  CHECK(run("simulate --config " + cfg + " --out " + csv).code == 1);
  std::ofstream(cfg) << "{\"n_units\": 10}";
  CHECK(run("simulate --config " + cfg + " --preset figure4 --out " + csv).code == 1);
}

TEST_CASE("data errors exit with code 2") {
  TempDir dir("data");
  CHECK(run("describe --input " + dir.file("missing.csv")).code == 2);

  std::string bad = dir.file("bad.csv");
  std::ofstream(bad) << "msa_id,quarter,CPI_core\nm,2020q1,1\n";
  CHECK(run("describe --input " + bad).code == 2);  // schema violation

  std::string csv = dir.file("panel.csv");
  REQUIRE(run("simulate --out " + csv).code == 0);
  RunResult r = run("figures --which 3 --msa nowhere --input " + csv);
  CHECK(r.code == 2);
  CHECK(r.err.find("nowhere") != std::string::npos);
}

TEST_CASE("estimation errors exit with code 3") {
  TempDir dir("est");
  std::string csv = dir.file("panel.csv");
  REQUIRE(run("simulate --out " + csv).code == 0);

  // Nothing is ever tight at tau = 1e9: model 2 is degenerate.
  RunResult r = run("estimate --input " + csv + " --model 2 --tau 1e9 --out-dir " + dir.str());
  CHECK(r.code == 3);
  CHECK(r.err.find("estimation error") != std::string::npos);
  CHECK(r.err.find("--tau") != std::string::npos);
}

TEST_CASE("mc subcommand produces tables") {
  TempDir dir("mc");
  RunResult r = run("mc --reps 3 --threads 1 --out-dir " + dir.str());
  CHECK(r.code == 0);
  CHECK(r.out.find("2sls") != std::string::npos);
  CHECK(fs::exists(dir.file("mc_results.csv")));
}

TEST_CASE("custom spec file drives estimate") {
  TempDir dir("spec");
  std::string csv = dir.file("panel.csv");
  REQUIRE(run("simulate --out " + csv).code == 0);

  std::string spec = dir.file("model.spec");
  std::ofstream(spec) << "depvar = pi_core_4q\n"
                         "endog = slack\n"
                         "instruments = shift_share\n"
                         "exog = rel_p_lag\n"
                         "cov = dk\n";
  RunResult r = run("estimate --input " + csv + " --spec " + spec + " --out-dir " + dir.str());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.file("estimate_custom.json")));

  std::ofstream(spec) << "depvar = pi_core_4q\nunknown_key = 1\n";
  CHECK(run("estimate --input " + csv + " --spec " + spec).code == 1);
  CHECK(run("estimate --input " + csv + " --spec " + dir.file("nope.spec")).code == 1);
}
