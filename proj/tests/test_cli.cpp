#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "zpc/cli.hpp"

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result zpc_run(std::vector<std::string> args) {
  args.insert(args.begin(), "zpc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = zpc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("zpc_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli proportions") {
  const auto r = zpc_run({"proportions", "--c", "4/3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("simple_and_critical,2/3,false") != std::string::npos);
  CHECK(r.out.find("average,5/6,false") != std::string::npos);
  CHECK(r.out.find("simple_or_critical,8/9,false") != std::string::npos);
  const auto dec = zpc_run({"proportions", "--c", "1.25"});
  CHECK(dec.out.find("C,5/4") != std::string::npos);
  const auto low = zpc_run({"proportions", "--c", "1/2"});
  CHECK(low.code == zpc::cli::kUsage);
  CHECK(nlohmann::json::parse(low.err.substr(0, low.err.find('\n')))["error"] == "usage");
}

TEST_CASE("cli nt") {
  const auto r = zpc_run({"nt", "--t", "100"});
  REQUIRE(r.code == 0);
  std::istringstream ss(r.out);
  std::string comment, header, row;
  std::getline(ss, comment);
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(comment == "# zpc nt t=100");
  CHECK(header.rfind("T,count,main_term,residual", 0) == 0);
  CHECK(row.rfind("100,29,", 0) == 0);
}

TEST_CASE("cli usage errors") {
  CHECK(zpc_run({}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"bogus"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"nt", "--frobnicate", "1"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"extract-c", "--range", "sideways"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"nt", "--t", "5"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"paircorr", "--alpha", "1:0:0.1"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"ingest"}).code == zpc::cli::kUsage);
  const auto missing = zpc_run({"extract-c", "--input", "/nonexistent/zeros.csv"});
  CHECK(missing.code == zpc::cli::kUsage);
  CHECK(missing.err.find("Usage:") != std::string::npos);
  CHECK(zpc_run({"lemma2", "--h", "0,x"}).code == zpc::cli::kUsage);
  CHECK(zpc_run({"--help"}).code == 0);
}

TEST_CASE("cli reruns are byte-identical for any worker count") {
  const auto a = zpc_run({"synth", "--t", "1000", "--b", "0.5", "--count", "300", "--seed", "11",
                          "--mult-weights", "0.6,0.3,0.1", "--shared", "0.2", "--mirror"});
  const auto b = zpc_run({"synth", "--t", "1000", "--b", "0.5", "--count", "300", "--seed", "11",
                          "--mult-weights", "0.6,0.3,0.1", "--shared", "0.2", "--mirror", "--workers", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const auto dir = scratch_dir();
  const auto zeros = dir / "z.csv";
  {
    std::ofstream f(zeros);
    f << a.out;
  }
  for (const char* cmd : {"paircorr", "fejer", "kb", "lemma2", "extract-c"}) {
    CAPTURE(cmd);
    std::vector<std::string> base{cmd, "--t", "1000", "--input", zeros.string()};
    if (std::string(cmd) == "paircorr") {
      base.insert(base.end(), {"--range", "dyadic", "--weight", "W", "--alpha", "0:1:0.25"});
    } else if (std::string(cmd) != "kb") {
      base.insert(base.end(), {"--range", "dyadic"});
    } else {
      base.insert(base.end(), {"--b", "0.5"});
    }
    auto w1 = base;
    w1.insert(w1.end(), {"--workers", "1"});
    auto w4 = base;
    w4.insert(w4.end(), {"--workers", "4"});
    const auto r1 = zpc_run(w1);
    const auto r4 = zpc_run(w4);
    const auto again = zpc_run(w1);
    CHECK(r1.code == 0);
    CHECK(!r1.out.empty());
    CHECK(r1.out == r4.out);
    CHECK(r1.out == again.out);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli writes files atomically with a metadata sidecar") {
  const auto dir = scratch_dir();
  const auto path = (dir / "props.csv").string();
  REQUIRE(zpc_run({"--out", path, "proportions", "--c", "2"}).code == 0);
  const auto first = slurp(path);
  CHECK(first.find("simple_and_critical,0,false") != std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(path + ".meta.json"));
  CHECK(meta["command"] == "proportions");
  CHECK(meta["config"]["c"] == "2");
  CHECK(meta.contains("timestamp"));
  REQUIRE(zpc_run({"proportions", "--c", "2", "--out", path}).code == 0);
  CHECK(slurp(path) == first);
  long entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 2);
  CHECK(zpc_run({"--out", (dir / "no" / "such" / "dir.csv").string(), "proportions"}).code ==
        zpc::cli::kComputation);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli pipeline exit status") {
  const auto dir = scratch_dir();
  const auto zeros = dir / "z.csv";
  const auto s = zpc_run({"synth", "--t", "1000", "--b", "0.4", "--count", "200", "--out", zeros.string()});
  REQUIRE(s.code == 0);
  const auto ok = zpc_run({"pipeline", "--t", "1000", "--b", "0.4", "--input", zeros.string()});
  CHECK(ok.code == 0);
  const auto doc = nlohmann::json::parse(ok.out);
  CHECK(doc["certified"] == true);
  CHECK(doc["config"]["b"] == "0.4");
  {
    std::ofstream f(zeros, std::ios::app);
    f << "0.9,1500.5,1\n";
  }
  const auto bad = zpc_run({"pipeline", "--t", "1000", "--b", "0.4", "--input", zeros.string()});
  CHECK(bad.code == zpc::cli::kCertification);
  const auto err = nlohmann::json::parse(bad.err.substr(0, bad.err.find('\n')));
  CHECK(err["error"] == "box_violation");
  CHECK(err["offenders"][0]["gamma"] == 1500.5);
  std::filesystem::remove_all(dir);
}
