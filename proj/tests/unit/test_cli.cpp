#include <doctest.h>

#include <sstream>

#include "cameo/shipped.hpp"
#include "cameo/util.hpp"
#include "cli.hpp"
#include "support/fixtures.hpp"

using namespace cameo;
using cameo::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cameo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"demo", "c"}).code == 2);
    CHECK(invoke({"run", "x.json", "-j", "0"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
  }

  TEST_CASE("plan prints per-process counts") {
    TempDir dir;
    CHECK(invoke({"synth", dir.path().string(), "--days", "40"}).code == 0);
    const auto wf = dir / "a.workflow.json";
    write_file_atomic(wf, std::string(shipped_pipeline(Formulation::A)));
    auto r = invoke({"plan", wf.string()});
    CHECK(r.code == 0);
    CHECK(r.out == "wind: 5\nscen_set: 5\ndesign_ss: 800\nsummarize: 1\ntotal: 811\n");
    r = invoke({"plan", wf.string(), "--set", "n_sets=2"});
    CHECK(r.out.find("design_ss: 160\n") != std::string::npos);
    CHECK(invoke({"plan", wf.string(), "--set", "oops"}).code == 2);
  }

  TEST_CASE("validate reports findings and fails on errors") {
    TempDir dir;
    write_file_atomic(dir / "bad.json", R"({"name":"x","channels":[],"processes":[
      {"name":"p","kind":{"builtin":"nope@1"},"inputs":{},"outputs":{}}]})");
    const auto r = invoke({"validate", (dir / "bad.json").string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("unknown operation") != std::string::npos);
    CHECK(r.out.find("1 error(s)") != std::string::npos);
    CHECK(invoke({"validate", (dir / "missing.json").string()}).code == 1);
  }

  TEST_CASE("run and report on an exec sweep") {
    TempDir dir;
    write_file_atomic(dir / "sweep.json", testing::exec_sweep_workflow(6, "echo ${inputs.x} > y.json"));
    auto r = invoke({"run", (dir / "sweep.json").string(), "--workdir", (dir / "w").string(), "-j", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("tasks: 6 total, 6 executed, 6 succeeded, 0 cached, 0 failed, 0 skipped") != std::string::npos);
    r = invoke({"run", (dir / "sweep.json").string(), "--workdir", (dir / "w").string(), "--resume"});
    CHECK(r.out.find("6 cached") != std::string::npos);
    fs::remove_all(dir / "w" / "runs" / "run-001" / "report");
    r = invoke({"report", (dir / "w" / "runs" / "run-001").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "w" / "runs" / "run-001" / "report" / "report.html"));
  }

  TEST_CASE("a failing sweep exits with 1") {
    TempDir dir;
    write_file_atomic(dir / "sweep.json", testing::exec_sweep_workflow(2, "exit 4"));
    const auto r = invoke({"run", (dir / "sweep.json").string(), "--workdir", (dir / "w").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("exit code 4") != std::string::npos);
  }
}
