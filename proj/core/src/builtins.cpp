#include <algorithm>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"
#include "cameo/optimizer.hpp"
#include "cameo/registry.hpp"
#include "cameo/scenario.hpp"
#include "cameo/summary.hpp"

namespace cameo {

namespace {

using domain::BatteryConfig;
using domain::HistoricalRecord;
using domain::PowerCurve;
using domain::WindFarmSite;

const std::vector<ParamSpec> kCurveParams = {
    {"cut_in_ms", false, false}, {"rated_ms", false, false}, {"cut_out_ms", false, false}};
const std::vector<ParamSpec> kEconomicsParams = {{"years", false, false}, {"discount_rate", false, false}};

std::vector<ParamSpec> concat(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

PowerCurve curve_from(const json& params) {
  PowerCurve c;
  c.cut_in_ms = params.value("cut_in_ms", c.cut_in_ms);
  c.rated_ms = params.value("rated_ms", c.rated_ms);
  c.cut_out_ms = params.value("cut_out_ms", c.cut_out_ms);
  c.check();
  return c;
}

opt::Economics economics_from(const json& params) {
  opt::Economics e;
  e.years = params.value("years", e.years);
  e.discount_rate = params.value("discount_rate", e.discount_rate);
  return e;
}

std::uint64_t seed_from(const json& params) {
  const json& s = params.at("seed");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(s.get<std::int64_t>());
  throw SchemaError("parameter 'seed' must be a non-negative integer");
}

std::size_t count_param(const json& params, const std::string& name) {
  const json& v = params.at(name);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw SchemaError("parameter '" + name + "' must be a non-negative integer");
  return static_cast<std::size_t>(v.get<std::int64_t>());
}

const json& tuple_part(const json& tuple, std::size_t i, std::size_t arity) {
  if (!tuple.is_array() || tuple.size() != arity)
    throw TaskFailed("expected a " + std::to_string(arity) + "-tuple input");
  return tuple[i];
}

lp::SolverOptions solver_options(const BuiltinContext& ctx) {
  lp::SolverOptions o;
  o.should_stop = ctx.should_stop;
  return o;
}

json design(const BuiltinContext& ctx, opt::SizingCase c) {
  c.economics = economics_from(ctx.params);
  const auto r = opt::solve_design(c, solver_options(ctx));
  if (r.status != lp::SolveStatus::Optimal)
    throw TaskFailed("design model for " + r.site_id + "/" + r.battery_id + " is " + lp::to_string(r.status));
  return {{"result", r}};
}

void add_all(Registry& reg) {
  reg.add({"wind@1", "1", {{"site", "WindFarmSite"}}, {{"data", "(WindFarmSite,HistoricalRecord)"}},
           {{"history", true, true}}, "hourly wind speed and market prices for one site"},
          [](const BuiltinContext& ctx) {
            const auto site = ctx.inputs.at("site").get<WindFarmSite>();
            const auto path = ctx.params.at("history").at("path").get<std::string>();
            HistoricalRecord record = domain::load_history(path, site.site_id);
            return json{{"data", json::array({site, record})}};
          });

  reg.add({"battery@1", "1", {}, {{"configs", "[BatteryConfig]"}}, {{"catalog", true, true}},
           "battery configurations of a catalog"},
          [](const BuiltinContext& ctx) {
            const auto path = ctx.params.at("catalog").at("path").get<std::string>();
            return json{{"configs", domain::load_battery_catalog(path)}};
          });

  reg.add({"scen_set@1", "1", {{"data", "(WindFarmSite,HistoricalRecord)"}},
           {{"sets", "[(WindFarmSite,ScenarioSet)]"}},
           concat({{"n_sets", false, true}, {"n_days", false, true}, {"seed", false, true}}, kCurveParams),
           "uniformly sampled representative-day sets"},
          [](const BuiltinContext& ctx) {
            const json& data = ctx.inputs.at("data");
            const auto site = tuple_part(data, 0, 2).get<WindFarmSite>();
            const auto record = tuple_part(data, 1, 2).get<HistoricalRecord>();
            const auto sets =
                scenario::sample_scenario_sets(record, count_param(ctx.params, "n_sets"), count_param(ctx.params, "n_days"),
                                               derive_seed(seed_from(ctx.params), site.site_id), curve_from(ctx.params));
            json out = json::array();
            for (const auto& s : sets) out.push_back(json::array({site, s}));
            return json{{"sets", out}};
          });

  reg.add({"scen_tree@1", "1", {{"data", "(WindFarmSite,HistoricalRecord)"}}, {{"tree", "(WindFarmSite,ScenarioTree)"}},
           concat({{"branching_1", false, false}, {"branching_2", false, false}, {"seed", false, true}}, kCurveParams),
           "three-stage scenario tree from clustered history"},
          [](const BuiltinContext& ctx) {
            const json& data = ctx.inputs.at("data");
            const auto site = tuple_part(data, 0, 2).get<WindFarmSite>();
            const auto record = tuple_part(data, 1, 2).get<HistoricalRecord>();
            scenario::Branching b;
            b.stage1 = ctx.params.value("branching_1", b.stage1);
            b.stage2 = ctx.params.value("branching_2", b.stage2);
            const auto tree = scenario::build_scenario_tree(record, b, derive_seed(seed_from(ctx.params), site.site_id),
                                                            {}, curve_from(ctx.params));
            return json{{"tree", json::array({site, tree})}};
          });

  reg.add({"design_ss@1", "1", {{"case", "(WindFarmSite,ScenarioSet,BatteryConfig)"}}, {{"result", "DesignResult"}},
           kEconomicsParams, "battery sizing over a scenario set (Formulation A)"},
          [](const BuiltinContext& ctx) {
            const json& c = ctx.inputs.at("case");
            opt::SizingCase sc;
            sc.site = tuple_part(c, 0, 3).get<WindFarmSite>();
            sc.stochastic = tuple_part(c, 1, 3).get<scenario::ScenarioSet>();
            sc.battery = tuple_part(c, 2, 3).get<BatteryConfig>();
            return design(ctx, std::move(sc));
          });

  reg.add({"design_st@1", "1", {{"case", "(WindFarmSite,ScenarioTree,BatteryConfig)"}}, {{"result", "DesignResult"}},
           kEconomicsParams, "battery sizing over a scenario tree (Formulation B)"},
          [](const BuiltinContext& ctx) {
            const json& c = ctx.inputs.at("case");
            opt::SizingCase sc;
            sc.site = tuple_part(c, 0, 3).get<WindFarmSite>();
            sc.stochastic = tuple_part(c, 1, 3).get<scenario::ScenarioTree>();
            sc.battery = tuple_part(c, 2, 3).get<BatteryConfig>();
            return design(ctx, std::move(sc));
          });

  reg.add({"summarize@1", "1", {{"results", "[DesignResult]"}}, {{"table", "FileRef"}, {"plots", "[FileRef]"}}, {},
           "consolidated CSV and per-site design plots"},
          [](const BuiltinContext& ctx) {
            const auto table = report::consolidate_results(ctx.inputs.at("results").get<std::vector<opt::DesignResult>>());
            const fs::path csv = ctx.task_dir / "consolidated.csv";
            write_file_atomic(csv, report::consolidated_csv(table));
            json plots = json::array();
            for (const auto& site : table.sites()) {
              const fs::path svg = ctx.task_dir / ("design_" + site + ".svg");
              write_file_atomic(svg, report::render_design_plot(table, site));
              plots.push_back(make_file_ref(svg));
            }
            return json{{"table", make_file_ref(csv)}, {"plots", plots}};
          });
}

}  // namespace

const Registry& builtin_registry() {
  static const Registry registry = [] {
    Registry r;
    add_all(r);
    return r;
  }();
  return registry;
}

}  // namespace cameo
