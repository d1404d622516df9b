#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "sqlab/io.hpp"
#include "sqlab/signal.hpp"

namespace fs = std::filesystem;
using namespace sqlab;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(SQLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  CmdResult r;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch_dir() {
  fs::path d = fs::temp_directory_path() /
               ("sqlab-cli-test-" + std::to_string(static_cast<long>(getpid())));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("experiment listing names the registry") {
  CmdResult r = run_cli("experiment --list");
  CHECK(r.code == 0);
  for (const char* id : {"sandwich", "decomposition", "cover", "excised-cone",
                         "aperture-slope", "weight-slope", "pairing", "refit",
                         "shift-growth", "domination", "kernels", "oracles"})
    CHECK(r.out.find(id) != std::string::npos);
}

TEST_CASE("kernel validation gives a verdict through the exit code") {
  CmdResult ok = run_cli("validate-kernel --kernel haar");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("\"passed\": true") != std::string::npos);
  CmdResult bad = run_cli("validate-kernel --kernel boxcar");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("\"passed\": false") != std::string::npos);
  CmdResult unknown = run_cli("validate-kernel --kernel gauss");
  CHECK(unknown.code == 2);
  CHECK(unknown.out.find("error:") != std::string::npos);
}

TEST_CASE("generate, compute, decompose, apchar round trip on disk") {
  fs::path d = scratch_dir();
  fs::path f_csv = d / "f.csv";
  fs::path m_csv = d / "m.csv";
  fs::path dec_json = d / "dec.json";
  fs::path w_csv = d / "w.csv";

  CmdResult gen = run_cli("--seed 5 --resolution 7 gen --kind signal --output " +
                          f_csv.string());
  REQUIRE(gen.code == 0);
  Signal f = signal_from_csv(read_file(f_csv.string()));
  CHECK(f.K == 7);

  // the same seed generates the same bytes
  fs::path f2_csv = d / "f2.csv";
  run_cli("--seed 5 --resolution 7 gen --kind signal --output " + f2_csv.string());
  CHECK(read_file(f_csv.string()) == read_file(f2_csv.string()));

  CmdResult comp = run_cli("compute --input " + f_csv.string() +
                           " --op maximal --output " + m_csv.string());
  REQUIRE(comp.code == 0);
  Signal M = signal_from_csv(read_file(m_csv.string()));
  REQUIRE(M.same_grid(f));
  for (std::size_t i = 0; i < f.v.size(); ++i)
    CHECK(M.v[i] >= std::fabs(f.v[i]));

  CmdResult cone = run_cli("compute --input " + f_csv.string() +
                           " --op cone --alpha 2 --output -");
  CHECK(cone.code == 0);
  Signal S = signal_from_csv(cone.out);
  for (double x : S.v) CHECK(x >= 0.0);

  CmdResult dec = run_cli("decompose --input " + f_csv.string() + " --output " +
                          dec_json.string());
  CHECK(dec.code == 0);
  std::string dj = read_file(dec_json.string());
  CHECK(dj.find("\"certificate\"") != std::string::npos);
  CHECK(dj.find("\"root_median\"") != std::string::npos);
  CHECK(dj.find("\"pass\": true") != std::string::npos);

  CmdResult genw = run_cli("--seed 6 --resolution 7 gen --kind weight --output " +
                           w_csv.string());
  REQUIRE(genw.code == 0);
  CmdResult ap = run_cli("apchar --input " + w_csv.string() + " --p 2");
  CHECK(ap.code == 0);
  CHECK(ap.out.find("\"value\"") != std::string::npos);
  CHECK(ap.out.find("\"window\"") != std::string::npos);

  fs::remove_all(d);
}

TEST_CASE("a deterministic experiment runs from the command line") {
  fs::path d = scratch_dir();
  CmdResult r = run_cli("--out " + d.string() + " experiment kernels");
  CHECK(r.code == 0);
  CHECK(r.out.find("experiment kernels: PASS") != std::string::npos);
  CHECK(fs::exists(d / "kernels.json"));
  fs::remove_all(d);
}

TEST_CASE("randomized experiments refuse to run without a seed") {
  CmdResult r = run_cli("experiment sandwich");
  CHECK(r.code == 2);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(r.out.find("seed") != std::string::npos);
}

TEST_CASE("usage errors exit with status 2") {
  CmdResult noid = run_cli("experiment");
  CHECK(noid.code == 2);
  CmdResult nofile = run_cli("compute --input /nonexistent-sqlab.csv --op cone");
  CHECK(nofile.code == 2);
  CHECK(nofile.out.find("error:") != std::string::npos);
}
