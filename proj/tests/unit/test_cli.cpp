#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dpl/io.hpp"

using namespace dpl;

namespace {

const std::string kData = DPL_DATA_DIR;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(DPL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("dplcheck_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("cli: classify") {
  Run r = run("classify " + kData + "/swap2.json --json");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["measure_preserving"] == true);
  CHECK(j["dps"] == true);
  CHECK(j["ads"] == true);
  CHECK(j["ergodic"] == true);
  CHECK(j["mixing"] == false);

  Run c = run("classify " + kData + "/const2.json");
  CHECK(c.code == 0);
  CHECK(c.out.find("measure_preserving false") != std::string::npos);
}

TEST_CASE("cli: frame-valid counterexample replays through check") {
  const std::string f = "\"L[1] O p -> O L[1] p\"";
  Run r = run("frame-valid " + kData + "/const2.json -f " + f + " --json");
  CHECK(r.code == 1);
  json j = json::parse(r.out);
  CHECK(j["valid"] == false);
  CHECK(j["counterexample"]["valuation"]["p"] == json::array({0}));
  int w = j["counterexample"]["world"];
  std::string val = j["counterexample"]["valuation"].dump();
  Run replay = run("check " + kData + "/const2.json -f " + f + " -w " + std::to_string(w) + " --valuation '" + val +
                   "' --json");
  CHECK(replay.code == 1);
  CHECK(json::parse(replay.out)["satisfied"] == false);

  Run ok = run("frame-valid " + kData + "/swap2.json -f " + f);
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("valid", 0) == 0);
}

TEST_CASE("cli: check") {
  Run r = run("check " + kData + "/swap2.json -f \"O p\" --json");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["extension"] == json::array({1}));
  Run w = run("check " + kData + "/swap2.json -f \"O p\" -w 1");
  CHECK(w.code == 0);
  CHECK(w.out.find("world 1 satisfies") != std::string::npos);
}

TEST_CASE("cli: parse") {
  Run r = run("parse -f \"L[1/2] (p & O q)\"");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("L[1/2] (p & O q)\n", 0) == 0);
  CHECK(r.out.find("Next") != std::string::npos);
  Run j = run("parse -f \"O !p\" --json");
  CHECK(json::parse(j.out)["ast"]["kind"] == "Next");
}

TEST_CASE("cli: exit codes for input errors and caps") {
  CHECK(run("parse -f \"p &\"").code == 2);
  CHECK(run("parse -f \"L[3/2] p\"").code == 2);
  CHECK(run("classify /nonexistent.json").code == 2);
  CHECK(run("frame-valid " + kData + "/swap2.json").code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("correspond bogus --exhaustive").code == 2);
  CHECK(run("correspond ergodic").code == 2);
  std::string bad = temp_file("bad.json", R"({"states":2,"kernel":[["1/2","1/3"],["1/2","1/2"]],"map":[0,1]})");
  CHECK(run("classify " + bad).code == 2);
  CHECK(run("frame-valid " + kData + "/swap2.json -f \"p & q & r\" --cap 4").code == 3);
}

TEST_CASE("cli: correspond") {
  Run ok = run("correspond measure-preserving --exhaustive -n 2 --denom 2 --json");
  CHECK(ok.code == 0);
  ExperimentSummary s = summary_from_json(json::parse(ok.out));
  CHECK(s.disagree == 0);
  CHECK(s.total > 0);
  CHECK(summary_to_json(s) == json::parse(ok.out));

  Run bad = run("correspond ergodic --exhaustive -n 2 --denom 2");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("disagreement") != std::string::npos);
  CHECK(run("correspond ergodic --exhaustive -n 2 --denom 2 --reading global --variant corrected").code == 0);

  Run a = run("correspond irreducible --random -N 10 --seed 5 -n 4 --json");
  Run b = run("correspond irreducible --random -N 10 --seed 5 -n 4 --json");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["total"] == 10);
}

TEST_CASE("cli: prove") {
  Run ok = run("prove " + kData + "/corpus.json");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("garch_demo ok") != std::string::npos);
  std::string bad = temp_file("bad_proof.json", R"({"lemmas":[{"name":"bad","assumptions":["p"],"steps":[
      {"id":1,"formula":"p","rule":"Assumption","index":0},
      {"id":2,"formula":"L[1] p","rule":"Nec_L1","premises":[1]}]}]})");
  Run r = run("prove " + bad + " --json");
  CHECK(r.code == 1);
  json j = json::parse(r.out);
  CHECK(j["ok"] == false);
  CHECK(j["results"][0]["step"] == 2);
  CHECK(j["results"][0]["reason"].get<std::string>().find("necessitation under assumptions") != std::string::npos);
}
