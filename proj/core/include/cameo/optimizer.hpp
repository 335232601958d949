#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cameo/domain.hpp"
#include "cameo/lp.hpp"
#include "cameo/scenario.hpp"

namespace cameo::opt {

using domain::BatteryConfig;
using domain::WindFarmSite;
using scenario::ScenarioSet;
using scenario::ScenarioTree;

struct Economics {
  int years = 30;
  double discount_rate = 0;

  /// Sum over y = 1..years of 365 / (1 + r)^y: days of revenue per unit daily revenue.
  double annuity_days() const;
};

struct SizingCase {
  WindFarmSite site;
  BatteryConfig battery;
  std::variant<ScenarioSet, ScenarioTree> stochastic;
  Economics economics;

  bool uses_tree() const { return std::holds_alternative<ScenarioTree>(stochastic); }
  std::string stochastic_id() const;
  /// Site ids must agree and every profile must share one horizon length.
  void check() const;
};

/// Variable indices and data of one dispatch block: a scenario day (model A) or a
/// scenario-tree leaf (model B). `e` has hours + 1 entries (SoC nodes).
struct DispatchBlock {
  std::string label;
  double weight = 0;                 // probability of the block
  std::vector<double> wind_mw;       // available wind per hour
  std::vector<double> energy_price;  // price earned on exported energy
  std::vector<double> reserve_price;
  std::vector<double> commit_price;  // model B: day-ahead price of the stage-1 parent
  std::vector<int> u, c, g, r, e;
  std::vector<int> q;                // model B: the parent's commitment variables
};

struct DesignModel {
  lp::LinearProgram lp;
  int power_var = 0;
  double annuity_days = 0;
  double cost_per_mw = 0;  // 1000 * $/kW
  double eta = 1;          // one-way efficiency sqrt(RTE)
  double duration_h = 0;
  double interconnect_mw = 0;
  std::size_t hours = 0;
  std::vector<DispatchBlock> blocks;
};

DesignModel build_model_a(const SizingCase& c);
DesignModel build_model_b(const SizingCase& c);

/// Expected daily market revenue of a solution vector, evaluated from the block tables.
double daily_revenue(const DesignModel& model, const std::vector<double>& x);

struct LifetimeValue {
  double gross_usd = 0;
  double cost_usd = 0;
  double net_usd = 0;
};

LifetimeValue net_value(double daily_revenue_usd, const BatteryConfig& battery, double power_mw,
                        const Economics& economics);

struct DesignResult {
  std::string site_id;
  std::string battery_id;
  std::string chemistry;
  double duration_h = 0;
  double rating_mw = 0;
  std::string stochastic_id;
  double p_star_mw = 0;
  double e_star_mwh = 0;
  double daily_rev_usd = 0;
  double gross_usd = 0;
  double cost_usd = 0;
  double net_usd = 0;
  lp::SolveStatus status = lp::SolveStatus::Optimal;
  double solve_ms = 0;
  int iterations = 0;

  bool operator==(const DesignResult&) const = default;
};

/// Builds model A or B by the kind of stochastic input, solves it and extracts the sizing.
DesignResult solve_design(const SizingCase& c, const lp::SolverOptions& options = {});

/// Grid enumeration over P, per-hour charge and discharge (step rating/m). Only for
/// scenario-set cases with at most six decision hours; a verification oracle.
DesignResult brute_force_design(const SizingCase& c, int m);

std::string design_csv_header();
std::string design_csv_row(const DesignResult& r, bool include_timing = true);

void to_json(json& j, const DesignResult& r);
void from_json(const json& j, DesignResult& r);
void to_json(json& j, const Economics& e);
void from_json(const json& j, Economics& e);

}  // namespace cameo::opt
