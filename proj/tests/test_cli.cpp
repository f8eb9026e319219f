#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SYMKL_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("symkl_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmallConfig = R"({
  "model": {"label_prob": 0.5, "cond_p": [0.5, 0.5], "cond_q": [0.25, 0.75]},
  "n_values": [200, 2000],
  "replications": 40,
  "master_seed": 5,
  "ci_level": 0.95,
  "checks": ["lln"]
})";

}  // namespace

TEST_CASE("estimate reports value and interval") {
  TempDir dir;
  const auto f = dir.write("c.csv", "a1,a2\n3,1\n1,3\n");
  const auto r = run("estimate " + f.string() + " --level 0.95");
  CHECK(r.code == 0);
  CHECK(r.out.find("estimate: 1.09861228866810") != std::string::npos);
  CHECK(r.out.find("ci_lo: ") != std::string::npos);
}

TEST_CASE("estimate with identical rows warns about zero variance") {
  TempDir dir;
  const auto r = run("estimate " + dir.write("c.csv", "2,2\n2,2\n").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("estimate: 0\n") != std::string::npos);
  CHECK(r.out.find("sigma2_hat: 0\n") != std::string::npos);
  CHECK(r.out.find("warning") != std::string::npos);
}

TEST_CASE("estimate exit codes") {
  TempDir dir;
  const auto degenerate = run("estimate " + dir.write("d.csv", "5,0\n2,3\n").string());
  CHECK(degenerate.code == 2);
  CHECK(degenerate.out.find("zero empirical cell") != std::string::npos);

  const auto mismatch = run("estimate " + dir.write("m.csv", "a,b\n1,2,3\n4,5,6\n").string());
  CHECK(mismatch.code == 1);
  CHECK(mismatch.out.find("line 2") != std::string::npos);

  CHECK(run("estimate " + (dir.path() / "missing.csv").string()).code == 1);
  CHECK(run("estimate").code == 1);
  CHECK(run("frobnicate").code == 1);
}

TEST_CASE("dry run validates and writes nothing") {
  TempDir dir;
  const auto cfg = dir.write("cfg.json", kSmallConfig);
  const auto out = dir.path() / "out";
  const auto r = run("simulate --config " + cfg.string() + " --out-dir " + out.string() + " --dry-run");
  CHECK(r.code == 0);
  CHECK_FALSE(fs::exists(out));

  const auto bad = dir.write("bad.json", R"({"model": {}, "surprise": 1})");
  CHECK(run("simulate --config " + bad.string() + " --dry-run").code == 1);
  CHECK(run("simulate --config " + (dir.path() / "nope.json").string()).code == 1);
}

TEST_CASE("simulate writes reports and is byte-reproducible") {
  TempDir dir;
  const auto cfg = dir.write("cfg.json", kSmallConfig);
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + a.string() + " --workers 1").code == 0);
  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + b.string() + " --workers 3").code == 0);
  const auto records = slurp(a / "records.csv");
  CHECK(records == slurp(b / "records.csv"));
  CHECK(std::count(records.begin(), records.end(), '\n') == 1 + 2 * 40);

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["per_n"].size() == 2);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["master_seed"] == 5);
  CHECK(manifest["checks"]["lln"] == "pass");
  CHECK(manifest["config"]["replications"] == 40);

  const auto c = dir.path() / "c";
  REQUIRE(run("simulate --config " + cfg.string() + " --out-dir " + c.string() + " --seed 6").code == 0);
  CHECK(slurp(c / "records.csv") != records);
}

TEST_CASE("check failure exits 3 and still writes reports") {
  TempDir dir;
  // A single sample size cannot show a decreasing LLN curve.
  const auto cfg = dir.write("one.json", R"({
    "model": {"label_prob": 0.5, "cond_p": [0.5, 0.5], "cond_q": [0.25, 0.75]},
    "n_values": [500], "replications": 10, "master_seed": 1, "checks": ["lln"]})");
  const auto out = dir.path() / "o";
  CHECK(run("lln-check --config " + cfg.string() + " --out-dir " + out.string()).code == 3);
  CHECK(fs::exists(out / "records.csv"));
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("bounds-check writes the bounds table") {
  TempDir dir;
  const auto cfg = dir.write("b.json", R"({
    "model": {"label_prob": 0.5, "cond_p": [0.5, 0.5], "cond_q": [0.25, 0.75]},
    "n_values": [100, 1000], "replications": 2000, "master_seed": 1, "checks": []})");
  const auto out = dir.path() / "o";
  const auto r = run("bounds-check --config " + cfg.string() + " --out-dir " + out.string());
  CHECK(r.code == 0);
  const auto table = slurp(out / "bounds.csv");
  CHECK(table.starts_with("bound,n,g,value,informative,empirical,replications,valid\n"));
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 7 * 2 * 4);
}

TEST_CASE("clt-check on the reference model at documented defaults") {
  TempDir dir;
  const auto r = run("clt-check --out-dir " + dir.path().string());
  CHECK_MESSAGE(r.code == 0, r.out);
  CHECK(r.out.find("clt: PASS") != std::string::npos);
  CHECK(r.out.find("coverage: PASS") != std::string::npos);
}
