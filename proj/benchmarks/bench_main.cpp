#include <benchmark/benchmark.h>

#include <filesystem>

#include "cameo/domain.hpp"
#include "cameo/lp.hpp"
#include "cameo/optimizer.hpp"
#include "cameo/plan.hpp"
#include "cameo/scenario.hpp"
#include "cameo/shipped.hpp"
#include "cameo/workflow.hpp"

using namespace cameo;

namespace {

opt::SizingCase demo_case(bool tree) {
  opt::SizingCase c;
  c.site = domain::demo_sites()[0];
  c.battery = domain::parse_battery_catalog(domain::demo_battery_catalog())[5];
  const auto h = domain::generate_synthetic_history(c.site, 42, 365);
  if (tree)
    c.stochastic = scenario::build_scenario_tree(h, {}, 1);
  else
    c.stochastic = scenario::sample_scenario_sets(h, 1, 10, 1)[0];
  return c;
}

void BM_SolveModelA(benchmark::State& state) {
  const auto model = opt::build_model_a(demo_case(false));
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve_lp(model.lp).objective);
  state.counters["variables"] = model.lp.num_variables();
}
BENCHMARK(BM_SolveModelA)->Unit(benchmark::kMillisecond);

void BM_SolveModelB(benchmark::State& state) {
  const auto model = opt::build_model_b(demo_case(true));
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve_lp(model.lp).objective);
  state.counters["variables"] = model.lp.num_variables();
}
BENCHMARK(BM_SolveModelB)->Unit(benchmark::kMillisecond);

void BM_BuildScenarioTree(benchmark::State& state) {
  const auto h = domain::generate_synthetic_history(domain::demo_sites()[0], 42, 365);
  for (auto _ : state) benchmark::DoNotOptimize(scenario::build_scenario_tree(h, {}, 1).nodes.size());
}
BENCHMARK(BM_BuildScenarioTree)->Unit(benchmark::kMillisecond);

void BM_PlanPipelineA(benchmark::State& state) {
  const auto dir = std::filesystem::temp_directory_path() / "cameo-bench-plan";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "sites.csv", domain::write_sites_csv(domain::demo_sites()));
  write_file_atomic(dir / "batteries.json", domain::demo_battery_catalog().dump());
  const auto spec = parse_workflow(shipped_pipeline(Formulation::A));
  const auto graph = build_dag(spec);
  const auto sources = resolve_sources(spec, dir);
  for (auto _ : state) benchmark::DoNotOptimize(plan_tasks(spec, graph, sources).total());
  std::filesystem::remove_all(dir);
}
BENCHMARK(BM_PlanPipelineA)->Unit(benchmark::kMillisecond);

void BM_CanonicalDumpTree(benchmark::State& state) {
  const json payload = std::get<scenario::ScenarioTree>(demo_case(true).stochastic);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_dump(payload).size());
}
BENCHMARK(BM_CanonicalDumpTree)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
