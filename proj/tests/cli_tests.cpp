// End-to-end tests that drive the built CLI binary. The binary path arrives
// through the CONDMIX_CLI environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("CONDMIX_CLI");
  REQUIRE_MESSAGE(env != nullptr, "CONDMIX_CLI must point at the condmix binary");
  return env;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("condmix_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file: " + path).c_str());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// One shared small pipeline fixture per process.
struct Pipeline {
  TempDir dir;
  Pipeline() {
    REQUIRE(run("synth --out-dir " + dir.path.string() + " --n 150 --m 600 --seed 3") == 0);
    REQUIRE(run("trim " + dir.file("simulated.csv") + " " + dir.file("measured.csv") +
                " --out " + dir.file("kept.csv")) == 0);
    REQUIRE(run("screen " + dir.file("measured.csv") + " " + dir.file("kept.csv") +
                " --inliers-out " + dir.file("inliers.csv") + " --outliers-out " +
                dir.file("outliers.csv") + " --report-out " + dir.file("report.csv") +
                " --curve-out " + dir.file("curve.csv")) == 0);
  }
};

Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("pipeline files carry provenance and manifest stamps") {
  auto& p = pipeline();
  const std::string kept = slurp(p.dir.file("kept.csv"));
  CHECK(kept.find("# provenance: trim") != std::string::npos);
  CHECK(kept.find("# manifest: ") != std::string::npos);
  const std::string inliers = slurp(p.dir.file("inliers.csv"));
  CHECK(inliers.find("# provenance: screen") != std::string::npos);
  const std::string report = slurp(p.dir.file("report.csv"));
  CHECK(report.find("row_id,avg_distance,rank,flagged") != std::string::npos);
  const std::string curve = slurp(p.dir.file("curve.csv"));
  CHECK(curve.find("tau,normalized_l1") != std::string::npos);
}

TEST_CASE("estimate works on screened input and emits all artifacts") {
  auto& p = pipeline();
  REQUIRE(run("estimate " + p.dir.file("inliers.csv") + " " + p.dir.file("kept.csv") +
              " --estimator knn --sigma 0 --quantiles-out " + p.dir.file("q.csv") +
              " --cdf-out " + p.dir.file("cdf.csv") + " --gumbel-out " +
              p.dir.file("gum.csv") + " --model-out " + p.dir.file("model.json") +
              " --manifest-out " + p.dir.file("manifest.json")) == 0);
  CHECK(slurp(p.dir.file("q.csv")).find("level_percent,knn") != std::string::npos);
  CHECK(slurp(p.dir.file("cdf.csv")).find("t,cdf") != std::string::npos);
  CHECK(slurp(p.dir.file("gum.csv")).find("neg_log_neg_log_cdf") != std::string::npos);
  CHECK(slurp(p.dir.file("model.json")).find("condmix-surrogate") != std::string::npos);
  CHECK(slurp(p.dir.file("manifest.json")).find("\"command\": \"estimate\"") !=
        std::string::npos);
}

TEST_CASE("estimate refuses unscreened input unless --no-screen") {
  auto& p = pipeline();
  CHECK(run("estimate " + p.dir.file("measured.csv") + " " + p.dir.file("kept.csv") +
            " --estimator knn") == 3);
  CHECK(run("estimate " + p.dir.file("measured.csv") + " " + p.dir.file("kept.csv") +
            " --estimator knn --no-screen") == 0);
}

TEST_CASE("evaluation-only files are refused by the pipeline") {
  auto& p = pipeline();
  CHECK(run("estimate " + p.dir.file("measured_y.evalonly.csv") + " " +
            p.dir.file("kept.csv") + " --estimator knn --no-screen") == 3);
  CHECK(run("trim " + p.dir.file("simulated.csv") + " " +
            p.dir.file("measured_y.evalonly.csv") + " --out " + p.dir.file("x.csv")) == 3);
}

TEST_CASE("quantiles command emits the comparison table with empirical column") {
  auto& p = pipeline();
  REQUIRE(run("quantiles " + p.dir.file("inliers.csv") + " " + p.dir.file("kept.csv") +
              " --out " + p.dir.file("table.csv") + " --trees 20 --eval-responses " +
              p.dir.file("measured_y.evalonly.csv")) == 0);
  const std::string table = slurp(p.dir.file("table.csv"));
  CHECK(table.find("level_percent,knn,knn_smoothed,forest,forest_smoothed,empirical") !=
        std::string::npos);
}

TEST_CASE("estimate outputs are byte-identical across runs and thread counts") {
  auto& p = pipeline();
  const std::string base = "estimate " + p.dir.file("inliers.csv") + " " +
                           p.dir.file("kept.csv") +
                           " --estimator forest --trees 20 --sigma silverman --seed 5";
  REQUIRE(run(base + " --threads 1 --quantiles-out " + p.dir.file("q1.csv") +
              " --model-out " + p.dir.file("m1.json")) == 0);
  REQUIRE(run(base + " --threads 4 --quantiles-out " + p.dir.file("q2.csv") +
              " --model-out " + p.dir.file("m2.json")) == 0);
  CHECK(slurp(p.dir.file("q1.csv")) == slurp(p.dir.file("q2.csv")));
  CHECK(slurp(p.dir.file("m1.json")) == slurp(p.dir.file("m2.json")));
}

TEST_CASE("screen --no-screen passes everything through") {
  auto& p = pipeline();
  REQUIRE(run("screen " + p.dir.file("measured.csv") + " " + p.dir.file("kept.csv") +
              " --inliers-out " + p.dir.file("all.csv") + " --no-screen") == 0);
  const std::string all = slurp(p.dir.file("all.csv"));
  CHECK(all.find("# provenance: no-screen") != std::string::npos);
  // 150 data rows + 2 comments + header.
  CHECK(std::count(all.begin(), all.end(), '\n') == 153);

  REQUIRE(run("estimate " + p.dir.file("all.csv") + " " + p.dir.file("kept.csv") +
              " --estimator knn") == 0);
}

TEST_CASE("threshold override is honored") {
  auto& p = pipeline();
  REQUIRE(run("trim " + p.dir.file("simulated.csv") + " " + p.dir.file("measured.csv") +
              " --out " + p.dir.file("kept_all.csv") + " --threshold-override 1e9") == 0);
  const std::string kept = slurp(p.dir.file("kept_all.csv"));
  CHECK(std::count(kept.begin(), kept.end(), '\n') == 603);  // all 600 rows kept

  // With nothing above the override, the outlier file is header-only.
  REQUIRE(run("screen " + p.dir.file("measured.csv") + " " + p.dir.file("kept.csv") +
              " --inliers-out " + p.dir.file("in_all.csv") + " --outliers-out " +
              p.dir.file("out_none.csv") + " --threshold-override 1e9") == 0);
  const std::string none = slurp(p.dir.file("out_none.csv"));
  CHECK(std::count(none.begin(), none.end(), '\n') == 3);
}

TEST_CASE("saved forest models reproduce the estimate when reloaded") {
  auto& p = pipeline();
  const std::string common = "estimate " + p.dir.file("inliers.csv") + " " +
                             p.dir.file("kept.csv") +
                             " --estimator forest --trees 15 --seed 8 --sigma 0";
  REQUIRE(run(common + " --forest-model-out " + p.dir.file("forest.json") +
              " --quantiles-out " + p.dir.file("qa.csv")) == 0);
  REQUIRE(run(common + " --forest-model-in " + p.dir.file("forest.json") +
              " --quantiles-out " + p.dir.file("qb.csv")) == 0);
  // Manifest digests differ (the reload records an extra input); data must not.
  CHECK(strip_comments(slurp(p.dir.file("qa.csv"))) ==
        strip_comments(slurp(p.dir.file("qb.csv"))));

  // A model fitted against a different grid size is rejected.
  CHECK(run(common + " --forest-model-in " + p.dir.file("forest.json") +
            " --grid-size 7 --quantiles-out " + p.dir.file("qc.csv")) == 3);
}

TEST_CASE("a measured file with responses passes them through unconsumed") {
  auto& p = pipeline();
  // Covariates mirror the synthetic schema; the y column rides along.
  std::string csv = "x1,x2,x3,x4,y\n";
  for (int i = 0; i < 40; ++i) {
    const double v = -0.6 + 0.03 * i;
    csv += std::to_string(v) + "," + std::to_string(-v) + ",0.1,0.2," +
           std::to_string(10.0 + i) + "\n";
  }
  write(p.dir.file("meas_y.csv"), csv);
  REQUIRE(run("screen " + p.dir.file("meas_y.csv") + " " + p.dir.file("kept.csv") +
              " --inliers-out " + p.dir.file("in_y.csv") + " --no-screen") == 0);
  const std::string inliers = slurp(p.dir.file("in_y.csv"));
  CHECK(inliers.find(",y") != std::string::npos);
  CHECK(inliers.find("10") != std::string::npos);
  REQUIRE(run("estimate " + p.dir.file("in_y.csv") + " " + p.dir.file("kept.csv") +
              " --estimator knn --quantiles-out " + p.dir.file("qy.csv")) == 0);
}

TEST_CASE("synth emits byte-identical files for a fixed seed") {
  TempDir a, b;
  REQUIRE(run("synth --out-dir " + a.path.string() + " --n 60 --m 200 --seed 123") == 0);
  REQUIRE(run("synth --out-dir " + b.path.string() + " --n 60 --m 200 --seed 123") == 0);
  CHECK(slurp(a.file("measured.csv")) == slurp(b.file("measured.csv")));
  CHECK(slurp(a.file("simulated.csv")) == slurp(b.file("simulated.csv")));
  CHECK(slurp(a.file("measured_y.evalonly.csv")) == slurp(b.file("measured_y.evalonly.csv")));
}

TEST_CASE("usage and data errors map to exit codes 2 and 3") {
  auto& p = pipeline();
  CHECK(run("estimate " + p.dir.file("inliers.csv") + " " + p.dir.file("kept.csv") +
            " --estimator nonsense") == 2);
  CHECK(run("bogus-subcommand") == 2);
  CHECK(run("--help") == 0);

  write(p.dir.file("bad.csv"), "a,b\n1,notanumber\n");
  CHECK(run("trim " + p.dir.file("bad.csv") + " " + p.dir.file("measured.csv") +
            " --out " + p.dir.file("nope.csv")) == 3);
  CHECK(run("trim " + p.dir.file("does_not_exist.csv") + " " + p.dir.file("measured.csv") +
            " --out " + p.dir.file("nope.csv")) == 3);
}

TEST_CASE("degenerate simulated column maps to exit code 4") {
  auto& p = pipeline();
  write(p.dir.file("const.csv"), "x1,x2,y\n1,5,2\n2,5,3\n3,5,4\n4,5,5\n");
  write(p.dir.file("m.csv"), "# provenance: no-screen\nx1,x2\n1,5\n2,5\n");
  CHECK(run("estimate " + p.dir.file("m.csv") + " " + p.dir.file("const.csv") +
            " --estimator knn --k 2") == 4);
}

TEST_CASE("validate --quick is byte-identical across runs and thread counts") {
  auto& p = pipeline();
  REQUIRE(run("validate --quick --seed 2 --threads 1 --out " + p.dir.file("v1.txt")) == 0);
  REQUIRE(run("validate --quick --seed 2 --threads 3 --out " + p.dir.file("v2.txt")) == 0);
  CHECK(slurp(p.dir.file("v1.txt")) == slurp(p.dir.file("v2.txt")));

  REQUIRE(run("validate --quick --seed 2 --baseline-only --out " + p.dir.file("vb.txt")) ==
          0);
  const std::string vb = slurp(p.dir.file("vb.txt"));
  CHECK(vb.find("[variance-deficit]") != std::string::npos);
  CHECK(vb.find("[surrogate-recovery]") == std::string::npos);
}
