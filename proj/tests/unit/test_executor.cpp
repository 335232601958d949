#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cameo/errors.hpp"
#include "cameo/executor.hpp"
#include "cameo/plan.hpp"
#include "cameo/provenance.hpp"
#include "cameo/task.hpp"
#include "support/fixtures.hpp"

using namespace cameo;
using cameo::testing::TempDir;

namespace {

TaskInstance exec_task(const std::string& command, json inputs = json::object()) {
  TaskInstance t;
  t.id = "work-0000-00000000";
  t.process = "work";
  t.command = command;
  t.payload = {{"inputs", std::move(inputs)}, {"params", json::object()}};
  t.outputs = {{"y", "Scalar"}};
  return t;
}

struct Sweep {
  WorkflowSpec spec;
  SweepPlan plan;
};

Sweep sweep(const std::string& doc) {
  Sweep s{parse_workflow(doc), {}};
  REQUIRE(validate_workflow(s.spec, builtin_registry()).ok());
  s.plan = plan_tasks(s.spec, build_dag(s.spec), resolve_sources(s.spec, {}));
  return s;
}

RunResult run(const Sweep& s, const fs::path& workdir, std::size_t parallel, bool resume = false) {
  RunOptions o;
  o.max_parallel = parallel;
  o.resume = resume;
  o.workdir = workdir;
  o.measure_resources = false;
  return run_workflow(s.spec, s.plan, builtin_registry(), o);
}

std::size_t count_status(const std::vector<TraceRecord>& records, const std::string& status) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const TraceRecord& r) { return r.status == status; }));
}

/// Largest `running` value in a scheduler log, checking the header and footer lines.
std::size_t peak_from_log(const fs::path& log) {
  std::ifstream in(log);
  std::string line;
  std::size_t peak = 0;
  std::getline(in, line);
  CHECK(line == "# elapsed_ms\tevent\ttask_id\trunning");
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    const auto fields = split(line, '\t');
    REQUIRE(fields.size() == 4);
    peak = std::max<std::size_t>(peak, std::stoul(fields[3]));
  }
  return peak;
}

}  // namespace

TEST_SUITE("task") {
  TEST_CASE("cache key ignores attempt, tag and retry policy") {
    auto a = exec_task("echo 1 > y.json", {{"x", 1}});
    auto b = a;
    b.attempt = 3;
    b.tag = "other";
    b.retry.max_retries = 5;
    const auto v = contract_version(a, builtin_registry());
    CHECK(cache_key(a, v) == cache_key(b, v));
    b.payload["inputs"]["x"] = 2;
    CHECK(cache_key(a, v) != cache_key(b, v));
    CHECK(cache_key(a, v) != cache_key(a, "exec-other"));
  }

  TEST_CASE("cache key is independent of object key order") {
    auto a = exec_task("true", json::parse(R"({"p":1,"q":{"b":2,"a":[1.5,2]}})"));
    auto b = exec_task("true", json::parse(R"({"q":{"a":[1.5,2],"b":2},"p":1})"));
    CHECK(cache_key(a, "1") == cache_key(b, "1"));
  }

  TEST_CASE("payloads without canonical form cannot be keyed") {
    auto t = exec_task("true", {{"x", std::nan("")}});
    CHECK_THROWS_AS(cache_key(t, "1"), SerializationError);
  }

  TEST_CASE("exec version follows the command text") {
    const auto a = contract_version(exec_task("echo 1 > y.json"), builtin_registry());
    const auto b = contract_version(exec_task("echo 2 > y.json"), builtin_registry());
    CHECK(a.rfind("exec-", 0) == 0);
    CHECK(a.size() == 21);
    CHECK(a != b);
  }

  TEST_CASE("a failing command reports its exit code and leaves no cache entry") {
    TempDir dir;
    CacheStore store(dir.path());
    const auto t = exec_task("false");
    const auto outcome = execute_task(t, builtin_registry(), store);
    CHECK(outcome.status == TaskOutcome::Status::Failed);
    CHECK(outcome.error == "exit code 1");
    CHECK_FALSE(store.lookup(cache_key(t, contract_version(t, builtin_registry()))).has_value());
    const auto manifest = CacheStore::read_manifest(outcome.workdir);
    REQUIRE(manifest.has_value());
    CHECK(manifest->status == "Failed");
  }

  TEST_CASE("a successful command is cached with its outputs") {
    TempDir dir;
    CacheStore store(dir.path());
    const auto t = exec_task("echo ${inputs.x} > y.json", {{"x", 7}});
    const auto outcome = execute_task(t, builtin_registry(), store);
    REQUIRE(outcome.status == TaskOutcome::Status::Succeeded);
    CHECK(outcome.outputs == json{{"y", 7}});
    const auto cached = store.lookup(cache_key(t, contract_version(t, builtin_registry())));
    REQUIRE(cached.has_value());
    CHECK(*cached == outcome.outputs);
    CHECK(outcome.start_ms <= outcome.complete_ms);
  }

  TEST_CASE("a tampered output invalidates the entry") {
    TempDir dir;
    CacheStore store(dir.path());
    const auto t = exec_task("echo 5 > y.json");
    const auto outcome = execute_task(t, builtin_registry(), store);
    write_file_atomic(outcome.workdir / "outputs.json", R"({"y":6})");
    CHECK_FALSE(store.lookup(cache_key(t, contract_version(t, builtin_registry()))).has_value());
  }

  TEST_CASE("commands exceeding their time limit are killed") {
    TempDir dir;
    CacheStore store(dir.path());
    auto t = exec_task("sleep 5; echo 1 > y.json");
    t.timeout_ms = 200;
    const auto start = now_ms();
    const auto outcome = execute_task(t, builtin_registry(), store);
    CHECK(now_ms() - start < 3000);
    CHECK(outcome.timed_out);
    CHECK(outcome.error.rfind("timeout:", 0) == 0);
  }

  TEST_CASE("missing or malformed output files fail the task") {
    TempDir dir;
    CacheStore store(dir.path());
    CHECK(execute_task(exec_task("true"), builtin_registry(), store).error == "missing output file y.json");
    auto t = exec_task("echo '[1,2]' > y.json");
    t.outputs = {{"y", "[Scalar]"}};
    t.emits = {{"y", 3}};
    CHECK(execute_task(t, builtin_registry(), store).error.find("emitted 2 items, declared 3") != std::string::npos);
  }

  TEST_CASE("retry policy: exponential backoff with bounded jitter") {
    TaskOutcome failed;
    const RetryPolicy policy{2, 100};
    auto d1 = apply_retry_policy(failed, policy, 1, 9);
    CHECK(d1.retry);
    CHECK(d1.delay_ms >= 90);
    CHECK(d1.delay_ms <= 110);
    auto d2 = apply_retry_policy(failed, policy, 2, 9);
    CHECK(d2.retry);
    CHECK(d2.delay_ms >= 180);
    CHECK(d2.delay_ms <= 220);
    CHECK_FALSE(apply_retry_policy(failed, policy, 3, 9).retry);
    CHECK(apply_retry_policy(failed, policy, 1, 9).delay_ms == d1.delay_ms);
    TaskOutcome ok;
    ok.status = TaskOutcome::Status::Succeeded;
    CHECK_FALSE(apply_retry_policy(ok, policy, 1, 9).retry);
    CHECK_FALSE(apply_retry_policy(failed, RetryPolicy{0, 100}, 1, 9).retry);
  }

  TEST_CASE("resource sampling: an idle task uses no CPU, a busy one a full core") {
    if (!process_stats_available()) return;
    TempDir dir;
    CacheStore store(dir.path());
    const auto idle = execute_task(exec_task("sleep 1; echo 1 > y.json"), builtin_registry(), store);
    REQUIRE(idle.usage.cpu_fraction.has_value());
    CHECK(*idle.usage.cpu_fraction < 0.1);
    REQUIRE(idle.usage.peak_rss_bytes.has_value());
    CHECK(*idle.usage.peak_rss_bytes > 0);
    const auto busy = execute_task(
        exec_task("i=0; while [ $i -lt 400000 ]; do i=$((i+1)); done; echo 1 > y.json", {{"x", 2}}),
        builtin_registry(), store);
    REQUIRE(busy.usage.cpu_fraction.has_value());
    CHECK(*busy.usage.cpu_fraction == doctest::Approx(1.0).epsilon(0.2));
  }

  TEST_CASE("disabled sampling leaves the metrics absent") {
    TempDir dir;
    CacheStore store(dir.path());
    const auto outcome = execute_task(exec_task("echo 1 > y.json"), builtin_registry(), store, {false});
    CHECK_FALSE(outcome.usage.cpu_fraction.has_value());
    CHECK_FALSE(outcome.usage.peak_rss_bytes.has_value());
  }

  TEST_CASE("commands substitute scalars, params and structured inputs") {
    TempDir dir;
    auto t = exec_task("echo ${inputs.x} ${params.k} ${inputs.s}", {{"x", 1.5}, {"s", {{"a", 1}}}});
    t.payload["params"]["k"] = "v";
    const auto cmd = render_command(t, dir.path());
    CHECK(cmd == "echo 1.5 v " + (dir.path() / "inputs" / "s.json").string());
    CHECK(json::parse(read_file(dir.path() / "inputs" / "s.json")) == json{{"a", 1}});
    CHECK_THROWS_AS(render_command(exec_task("echo ${inputs.nope}"), dir.path()), TaskFailed);
  }
}

TEST_SUITE("executor") {
  TEST_CASE("bounded parallelism: never more than the limit, reaching it") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(12, "sleep 0.3; echo ${inputs.x} > y.json"));
    const auto r = run(s, dir.path(), 3);
    CHECK(r.ok());
    CHECK(r.succeeded == 12);
    CHECK(r.peak_running == 3);
    CHECK(peak_from_log(r.scheduler_log) == 3);
    const auto trace = read_trace(r.trace_file);
    CHECK(trace.size() == 12);
    CHECK(count_status(trace, "Succeeded") == 12);
  }

  TEST_CASE("run directories are numbered and results published in order") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(2, "echo ${inputs.x} > y.json"));
    CHECK(run(s, dir.path(), 1).run_dir.filename() == "run-001");
    CHECK(run(s, dir.path(), 1).run_dir.filename() == "run-002");
    CHECK(fs::exists(dir.path() / "runs" / "run-002" / "report" / "stats.csv"));
  }

  TEST_CASE("transient failures are retried and traced per attempt") {
    TempDir dir;
    const auto marks = dir.path() / "marks";
    fs::create_directories(marks);
    const std::string cmd = "if [ -f " + marks.string() + "/m${inputs.x} ]; then echo 1 > y.json; else touch " +
                            marks.string() + "/m${inputs.x}; exit 3; fi";
    const auto s = sweep(testing::exec_sweep_workflow(4, cmd, 1));
    const auto r = run(s, dir.path(), 2);
    CHECK(r.ok());
    CHECK(r.succeeded == 4);
    const auto trace = read_trace(r.trace_file);
    CHECK(count_status(trace, "Failed") == 4);
    CHECK(count_status(trace, "Succeeded") == 4);
    for (const auto& rec : trace) CHECK(rec.attempt == (rec.status == "Failed" ? 1 : 2));
  }

  TEST_CASE("a permanent failure skips its dependents only") {
    auto doc = json::parse(testing::exec_sweep_workflow(4, "test ${inputs.x} -ne 2 && echo ${inputs.x} > y.json"));
    doc["processes"].push_back({{"name", "down"},
                                {"kind", {{"exec", "echo ${inputs.v} > z.json"}}},
                                {"inputs", {{"v", "work.y"}}},
                                {"outputs", {{"z", "Scalar"}}}});
    TempDir dir;
    const auto s = sweep(doc.dump());
    const auto r = run(s, dir.path(), 2);
    CHECK_FALSE(r.ok());
    CHECK(r.failed == 1);
    CHECK(r.skipped == 1);
    CHECK(r.succeeded == 6);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("exit code 1") != std::string::npos);
    const auto trace = read_trace(r.trace_file);
    CHECK(count_status(trace, "FailedPermanent") == 1);
    CHECK(trace.size() == 7);
    for (std::size_t i = 0; i < s.plan.total(); ++i)
      if (s.plan.tasks[i].process == "down" && s.plan.tasks[i].deps[0] == 2)
        CHECK(r.states[i] == TaskState::Skipped);
  }

  TEST_CASE("resume serves every finished task from the cache") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(5, "echo ${inputs.x} > y.json"));
    REQUIRE(run(s, dir.path(), 2).ok());
    const auto r = run(s, dir.path(), 2, true);
    CHECK(r.executed == 0);
    CHECK(r.cached == 5);
    const auto trace = read_trace(r.trace_file);
    CHECK(trace.size() == 5);
    for (const auto& rec : trace) {
      CHECK(rec.status == "Cached");
      CHECK(rec.cache_hit);
      CHECK_FALSE(rec.cpu_fraction.has_value());
    }
    const auto fresh = run(s, dir.path(), 2, false);
    CHECK(fresh.executed == 5);
  }

  TEST_CASE("editing the command invalidates the cache") {
    TempDir dir;
    REQUIRE(run(sweep(testing::exec_sweep_workflow(3, "echo ${inputs.x} > y.json")), dir.path(), 1).ok());
    const auto r = run(sweep(testing::exec_sweep_workflow(3, "echo 0 > y.json")), dir.path(), 1, true);
    CHECK(r.executed == 3);
    CHECK(r.cached == 0);
  }

  TEST_CASE("a torn cache entry is re-executed on resume") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(4, "echo ${inputs.x} > y.json"));
    REQUIRE(run(s, dir.path(), 1).ok());
    std::vector<fs::path> manifests;
    for (const auto& e : fs::recursive_directory_iterator(dir.path() / "work"))
      if (e.path().filename() == ".outcome") manifests.push_back(e.path());
    REQUIRE(manifests.size() == 4);
    fs::remove(manifests[1]);
    const auto r = run(s, dir.path(), 1, true);
    CHECK(r.executed == 1);
    CHECK(r.cached == 3);
  }

  TEST_CASE("abort stops dispatch and resume finishes the rest") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(10, "echo ${inputs.x} > y.json"));
    RunOptions o;
    o.workdir = dir.path();
    o.abort_after_successes = 3;
    o.measure_resources = false;
    CHECK_THROWS_AS(run_workflow(s.spec, s.plan, builtin_registry(), o), RunAborted);
    const auto partial = read_trace(dir.path() / "runs" / "run-001" / "trace.tsv");
    CHECK(count_status(partial, "Succeeded") == 3);
    CHECK(fs::exists(dir.path() / "runs" / "run-001" / "report" / "report.html"));
    const auto r = run(s, dir.path(), 1, true);
    CHECK(r.cached == 3);
    CHECK(r.executed == 7);
  }

  TEST_CASE("an interrupt flag set before the run dispatches nothing") {
    TempDir dir;
    const auto s = sweep(testing::exec_sweep_workflow(3, "echo ${inputs.x} > y.json"));
    std::atomic<bool> flag{true};
    RunOptions o;
    o.workdir = dir.path();
    o.interrupt = &flag;
    CHECK_THROWS_AS(run_workflow(s.spec, s.plan, builtin_registry(), o), RunAborted);
  }

  TEST_CASE("identical payloads execute once") {
    auto doc = json::parse(testing::exec_sweep_workflow(1, "echo 1 > y.json"));
    doc["channels"][0]["source"]["values"] = json::array({4, 4, 4});
    TempDir dir;
    const auto s = sweep(doc.dump());
    const auto r = run(s, dir.path(), 3);
    CHECK(r.ok());
    CHECK(r.executed == 1);
    CHECK(r.cached == 2);
  }

  TEST_CASE("task time limits fail the task permanently after retries") {
    auto doc = json::parse(testing::exec_sweep_workflow(1, "sleep 5; echo 1 > y.json", 1));
    doc["processes"][0]["timeout_ms"] = 150;
    TempDir dir;
    const auto r = run(sweep(doc.dump()), dir.path(), 1);
    CHECK(r.failed == 1);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("timeout") != std::string::npos);
    CHECK(read_trace(r.trace_file).size() == 2);
  }

  TEST_CASE("tags render from payload fields") {
    const auto s = sweep(testing::exec_sweep_workflow(2, "echo 1 > y.json"));
    const json payload = {{"inputs", {{"x", 1}}}, {"params", json::object()}};
    CHECK(render_tag("{x}", s.plan.tasks[1], payload) == "1");
    CHECK(render_tag("{process}#{ordinal}", s.plan.tasks[1], payload) == "work#1");
    CHECK(render_tag("{unknown}", s.plan.tasks[1], payload) == "{unknown}");
    const json nested = {{"inputs", {{"case", json::array({{{"site_id", "s3"}}, {{"set_id", "s3-set02"}},
                                                           {{"config_id", "b7"}}})}}},
                         {"params", json::object()}};
    CHECK(render_tag("{site}/{battery}/{set}", s.plan.tasks[0], nested) == "s3/b7/s3-set02");
  }
}
