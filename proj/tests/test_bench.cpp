#include "adaagm/bench.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adaagm;
using namespace adaagm::bench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("adaagm_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file) << text;
    return path / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

const char* kMatrixConfig = R"(
[experiment]
seeds = 1, 2
thinning = 1

[problem quad]
kind = quadratic
diag = 1, 10, 100
offset = 1, 1, 1

[problem lse]
kind = log_sum_exp
random_rows = 12
random_dim = 3
random_seed = 4
minimizer = centered

[solver ada]
algorithm = adaagm
profile = cor-4.4
max_iters = 300

[solver gd]
algorithm = gd
max_iters = 300

[solver nest]
algorithm = nesterov
step = 1/L
max_iters = 300
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ADAAGM_BENCH_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("splitmix64 reference output") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("Rng is deterministic and well spread") {
  Rng a(42), b(42), c(43);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  Rng r(7);
  double sum = 0, sq = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(cell_seed(0, 1, 2) != cell_seed(1, 0, 2));
  CHECK(cell_seed(0, 1, 2) == cell_seed(0, 1, 2));
}

TEST_CASE("section parser") {
  const auto secs = parse_sections("# c\n[problem a]\nkind = quadratic # trailing\n\n[experiment]\nseeds=1\n");
  REQUIRE(secs.size() == 2);
  CHECK(secs[0].type == "problem");
  CHECK(secs[0].name == "a");
  CHECK(secs[0].entries.at("kind").value == "quadratic");
  CHECK(secs[0].entries.at("kind").line == 3);
  CHECK(secs[1].entries.at("seeds").value == "1");

  try {
    parse_sections("[problem a]\nkind = x\n  oops\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_sections("[problem a\n"), ConfigError);
  CHECK_THROWS_AS(parse_sections("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_sections("[s a]\nx=1\nx=2\n"), ConfigError);
}

TEST_CASE("empty config") {
  try {
    parse_config("");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("no problems defined") != std::string::npos);
  }
}

TEST_CASE("unknown keys are reported with their position") {
  try {
    parse_config("[problem a]\nkind = quadratic\ndiag = 1\ncolour = red\n[solver s]\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("4:1: unknown key 'colour'") != std::string::npos);
  }
}

TEST_CASE("invalid parameter combinations are delegated to parameter validation") {
  TempDir dir("badparams");
  const auto cfg = dir.write("c.cfg",
                             "[problem a]\nkind = quadratic\ndiag = 1\n"
                             "[solver s]\nalgorithm = adaagm\nprofile = custom\n"
                             "m = 0.99\nt0 = 2\ngamma = 1.9\nbeta = 1\nomega = 0\ndelta = 0\n");
  const ValidationReport r = validate_config(cfg);
  CHECK_FALSE(r.ok);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].find("step-growth condition") != std::string::npos);
  CHECK(r.errors[0].find("0.263158") != std::string::npos);
}

TEST_CASE("missing files are reported") {
  TempDir dir("missing");
  const auto cfg = dir.write("c.cfg", "[problem a]\nkind = quadratic\nmatrix = nope.csv\n[solver s]\n");
  const ValidationReport r = validate_config(cfg);
  CHECK_FALSE(r.ok);
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].find("missing file 'nope.csv'") != std::string::npos);
}

TEST_CASE("well-formed config validates and lists q") {
  TempDir dir("ok");
  const auto cfg = dir.write("c.cfg", kMatrixConfig);
  const ValidationReport r = validate_config(cfg);
  CHECK(r.ok);
  REQUIRE_FALSE(r.lines.empty());
  CHECK(r.lines[0] == "ok");
  bool saw_q = false;
  for (const auto& l : r.lines) saw_q = saw_q || l.find("profile cor-4.4 q=0.2") != std::string::npos;
  CHECK(saw_q);
}

TEST_CASE("problems build from CSV files") {
  TempDir dir("csv");
  dir.write("A.csv", "2,0\n0,8\n");
  dir.write("b.csv", "2\n8\n");
  const auto cfg = dir.write("c.cfg",
                             "[problem a]\nkind = quadratic\nmatrix = A.csv\noffset_csv = b.csv\n"
                             "[solver s]\nprofile = cor-4.3\n");
  const ExperimentConfig c = load_config(cfg);
  const SmoothProblem p = build_problem(c.problems[0], c.base_dir);
  CHECK((*p.x_star() - Vector::Ones(2)).norm() <= 1e-14);
  CHECK(*p.L_known() == 8.0);
  CHECK(p.name() == "a");
}

TEST_CASE("experiment matrix: cardinality, summary and determinism") {
  TempDir dir("matrix");
  const auto cfg_path = dir.write("c.cfg", kMatrixConfig);
  const ExperimentConfig cfg = load_config(cfg_path);

  RunSettings one;
  one.output_dir = dir.path / "out1";
  const ExperimentSummary s1 = run_experiment(cfg, one);
  REQUIRE(s1.cells.size() == 12);
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "out1"))
    traces += e.path().extension() == ".csv" && e.path().filename() != "summary.csv" &&
              e.path().filename() != "violations.csv";
  CHECK(traces == 12);
  const std::string summary = slurp(dir.path / "out1" / "summary.csv");
  CHECK(count_lines(summary) == 13);
  CHECK(summary.find("quad,ada,1,ok,300,") != std::string::npos);
  CHECK(summary.find(",0.20000000000000001,") != std::string::npos);
  CHECK(fs::exists(dir.path / "out1" / "quad_ada_2.csv"));
  for (const auto& c : s1.cells) {
    CHECK(c.status == "ok");
    CHECK(c.certificates_passed == c.certificates_total);
  }

  RunSettings four;
  four.output_dir = dir.path / "out2";
  four.threads = 4;
  run_experiment(cfg, four);
  for (const auto& e : fs::directory_iterator(dir.path / "out1"))
    CHECK(slurp(e.path()) == slurp(dir.path / "out2" / e.path().filename()));
}

TEST_CASE("a diverging cell is isolated") {
  TempDir dir("diverge");
  const ExperimentConfig cfg = parse_config(
      "[experiment]\noutput_dir = " + (dir.path / "out").string() +
      "\n[problem q]\nkind = quadratic\ndiag = 1, 2\n"
      "[solver wild]\nalgorithm = gd\nstep = 10\nmax_iters = 5000\n"
      "[solver ada]\nprofile = cor-4.4\nmax_iters = 50\n");
  const ExperimentSummary s = run_experiment(cfg);
  REQUIRE(s.cells.size() == 2);
  CHECK(s.any_diverged());
  CHECK(s.cells[0].status == "diverged");
  CHECK(s.cells[1].status == "ok");
  CHECK(fs::exists(dir.path / "out" / "q_wild_0.csv"));
  CHECK(count_lines(slurp(dir.path / "out" / "q_ada_0.csv")) == 52);
}

TEST_CASE("unwritable output is an error before any run") {
  TempDir dir("unwritable");
  dir.write("file", "x");
  ExperimentConfig cfg = parse_config("[problem q]\nkind = quadratic\ndiag = 1\n[solver s]\n");
  RunSettings s;
  s.output_dir = dir.path / "file" / "sub";
  CHECK_THROWS(run_experiment(cfg, s));
}

TEST_CASE("default profile follows strong convexity") {
  TempDir dir("default");
  const ExperimentConfig cfg = parse_config(
      "[experiment]\noutput_dir = " + (dir.path / "out").string() +
      "\n[problem sc]\nkind = quadratic\ndiag = 1, 4\n"
      "[problem flat]\nkind = quadratic\ndiag = 0, 4\n"
      "[solver s]\nmax_iters = 20\n");
  const ExperimentSummary s = run_experiment(cfg);
  CHECK(*s.cells[0].q == doctest::Approx(1.0 / 16));
  CHECK(*s.cells[1].q == doctest::Approx(0.2));
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cli");
  const auto good = dir.write("good.cfg", kMatrixConfig);
  const auto empty = dir.write("empty.cfg", "");
  const auto wild = dir.write("wild.cfg",
                              "[problem q]\nkind = quadratic\ndiag = 1\n"
                              "[solver g]\nalgorithm = gd\nstep = 10\nmax_iters = 5000\n");
  const std::string out = (dir.path / "out").string();
  CHECK(run_cli("validate " + good.string()) == 0);
  CHECK(run_cli("validate " + empty.string()) == 1);
  CHECK(run_cli("run " + empty.string()) == 1);
  CHECK(run_cli("run " + good.string() + " --out " + out + " --threads 2") == 0);
  CHECK(run_cli("run " + wild.string() + " --out " + out + "/w") == 2);
  CHECK(run_cli("certify " + out + "/quad_ada_1.csv --problem " + good.string() +
                ":quad --profile cor-4.4 --kind sublinear") == 0);
  CHECK(run_cli("certify " + out + "/quad_ada_1.csv --problem " + good.string() +
                ":quad --profile cor-4.4 --kind step_floor") == 0);
  CHECK(run_cli("certify " + out + "/quad_ada_1.csv --problem " + good.string() +
                ":nothere --profile cor-4.4 --kind sublinear") == 1);
  CHECK(run_cli("bogus") == 1);

  // Inflate one gap so the re-check fails.
  std::string trace = slurp(out + "/quad_ada_1.csv");
  const auto line = trace.find("\n50,");
  REQUIRE(line != std::string::npos);
  const auto comma = trace.find(',', line + 4);
  trace.replace(line + 4, comma - line - 4, "1000");
  dir.write("bad.csv", trace);
  CHECK(run_cli("certify " + (dir.path / "bad.csv").string() + " --problem " + good.string() +
                ":quad --profile cor-4.4 --kind sublinear") == 3);
}
