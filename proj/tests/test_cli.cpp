#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "delaylattice/cli.hpp"

using namespace dlat;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("delay_lattice_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kCanonicalConfig = R"({
  "dim": 1,
  "delays": [1.0],
  "coefficients": [{"type": "constant", "matrix": [[0.5]]}],
  "start": 0.0,
  "phi": {"type": "pwlinear", "times": [-1.0, 0.0], "values": [[2.0], [1.0]]},
  "horizon": 3.0,
  "tolerances": {"compat": 1e-9, "resolvent": 1e-12, "certify": 1e-8},
  "seed": 42
})";

const char* kIncompatibleConfig = R"({
  "dim": 1,
  "delays": [1.0],
  "coefficients": [{"type": "constant", "matrix": [[0.5]]}],
  "start": 0.0,
  "phi": {"type": "constant", "vector": [1.0]},
  "horizon": 3.0
})";

std::string write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CaptureStdout {
  std::stringstream buffer;
  std::streambuf* old;
  CaptureStdout() : old(std::cout.rdbuf(buffer.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(old); }
};

}  // namespace

TEST_CASE("check subcommand validates the canonical fixture") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  CaptureStdout cap;
  const int code = run_cli({"check", "--config", cfg});
  CHECK(code == 0);
  CHECK(cap.buffer.str().find("compatibility residual = 0") != std::string::npos);
}

TEST_CASE("check fails on incompatible data") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kIncompatibleConfig);
  CaptureStdout cap;
  CHECK(run_cli({"check", "--config", cfg}) == 1);
}

TEST_CASE("simulate warns but succeeds on incompatible data") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kIncompatibleConfig);
  const std::string out = (dir.path / "traj.csv").string();
  CaptureStdout cap;
  const int code = run_cli({"simulate", "--config", cfg, "--t-end", "2.0", "--step", "0.25",
                            "--out", out});
  CHECK(code == 0);
  CHECK(cap.buffer.str().find("compatibility residual = 0.5") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("t,re(y_1),im(y_1)\n", 0) == 0);
  CHECK(csv.find("\r") == std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical CSV output") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  const std::string out1 = (dir.path / "a.csv").string();
  const std::string out2 = (dir.path / "b.csv").string();
  CaptureStdout cap;
  REQUIRE(run_cli({"simulate", "--config", cfg, "--t-end", "3.0", "--step", "0.1", "--out",
                   out1, "--seed", "7"}) == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg, "--t-end", "3.0", "--step", "0.1", "--out",
                   out2, "--seed", "7"}) == 0);
  CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("represent --certify reports a tiny max error and exits cleanly") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  CaptureStdout cap;
  const int code = run_cli({"represent", "--config", cfg, "--certify", "--t-end", "2.0",
                            "--samples", "12"});
  CHECK(code == 0);
  CHECK(cap.buffer.str().find("max error = ") != std::string::npos);
}

TEST_CASE("resolvent subcommand prints residual lines") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  CaptureStdout cap;
  CHECK(run_cli({"resolvent", "--config", cfg, "--samples", "6"}) == 0);
  const std::string text = cap.buffer.str();
  CHECK(text.find("atomic resolvent residual") != std::string::npos);
  CHECK(text.find("grid resolvent residual") != std::string::npos);
}

TEST_CASE("stability subcommand writes the profile CSV and a fit") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  const std::string out = (dir.path / "profile.csv").string();
  CaptureStdout cap;
  CHECK(run_cli({"stability", "--config", cfg, "--t-end", "9.0", "--samples", "9", "--out",
                 out}) == 0);
  CHECK(cap.buffer.str().find("decay certified (empirical)") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("t_minus_s,V\n", 0) == 0);
}

TEST_CASE("fundamental subcommand writes the slice atom CSV") {
  TempDir dir;
  const std::string cfg = write_file(dir.path / "p.json", kCanonicalConfig);
  const std::string out = (dir.path / "atoms.csv").string();
  CaptureStdout cap;
  CHECK(run_cli({"fundamental", "--config", cfg, "--t-end", "2.5", "--step", "0.5", "--out",
                 out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("t,alpha,f_value,n_indices,re(jump_11),im(jump_11)\n", 0) == 0);
}

TEST_CASE("malformed configs exit with a diagnostic") {
  TempDir dir;
  CaptureStdout cap;
  CHECK(run_cli({"check", "--config", (dir.path / "missing.json").string()}) == 1);
  const std::string bad = write_file(dir.path / "bad.json", "{\"dim\": 1, \"delays\": [1.0]");
  CHECK(run_cli({"check", "--config", bad}) == 1);
  const std::string field = write_file(
      dir.path / "field.json",
      R"({"dim": 1, "delays": [1.0], "coefficients": [{"type": "nope"}], "phi": {"type": "constant", "vector": [0.0]}})");
  CHECK(run_cli({"check", "--config", field}) == 1);
}
