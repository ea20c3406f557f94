#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "capi_client.hpp"

#ifndef ANNOTKIT_CLI
#error "ANNOTKIT_CLI must name the command-line binary"
#endif

using namespace annotkit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome run_cli(const TempDir& dir, const std::string& args) {
  const auto err_path = dir.path() / "stderr.txt";
  const std::string command = std::string(ANNOTKIT_CLI) + " " + args + " 2>" + err_path.string();
  Outcome outcome;
  std::FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) outcome.out.append(buf, n);
  const int status = ::pclose(pipe);
  outcome.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  outcome.err = slurp(err_path);
  return outcome;
}

}  // namespace

TEST_CASE("cli errors are one machine-parsable line with a nonzero exit") {
  TempDir dir("cli");
  const auto store = (dir.path() / "store").string();

  const auto missing = run_cli(dir, "--store " + store + " status");
  CHECK(missing.exit_code != 0);
  CHECK(missing.err.rfind("E_", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  const auto init = run_cli(dir, "--store " + store + " init --kind doc_class --classes POS,NEG --annotators A,B --batch-size 2");
  CHECK(init.exit_code == 0);

  std::ofstream(dir.path() / "docs.jsonl") << R"({"id":"a","text":"one"})" "\n" R"({"id":"a","text":"two"})" "\n";
  const auto dup = run_cli(dir, "--store " + store + " add-docs " + (dir.path() / "docs.jsonl").string());
  CHECK(dup.exit_code == ANNOTKIT_E_CONFLICT);
  CHECK(dup.err.rfind("E_CONFLICT: ", 0) == 0);
  CHECK(dup.err.find("'a'") != std::string::npos);
  CHECK(std::count(dup.err.begin(), dup.err.end(), '\n') == 1);

  const auto status = run_cli(dir, "--store " + store + " --json status");
  CHECK(status.exit_code == 0);
  const auto report = Json::parse(status.out);
  CHECK(report.at("command") == "status");
  CHECK(report.at("summary").get<std::string>().rfind("iteration 0, 0 annotated", 0) == 0);

  const auto plain = run_cli(dir, "--store " + store + " status");
  CHECK(plain.out.rfind("iteration 0, 0 annotated", 0) == 0);

  const auto usage = run_cli(dir, "--store " + store + " plan --mode sideways");
  CHECK(usage.exit_code != 0);
}
