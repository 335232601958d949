#include "cameo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cameo/errors.hpp"
#include "cameo/util.hpp"

namespace cameo::opt {

using lp::Relation;
using lp::Term;

double Economics::annuity_days() const {
  double a = 0;
  for (int y = 1; y <= years; ++y) a += 365.0 / std::pow(1.0 + discount_rate, y);
  return a;
}

std::string SizingCase::stochastic_id() const {
  return std::visit(
      [](const auto& s) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ScenarioSet>)
          return s.set_id;
        else
          return s.tree_id;
      },
      stochastic);
}

void SizingCase::check() const {
  site.check();
  battery.check();
  if (economics.years < 0 || !(economics.discount_rate >= 0))
    throw RangeError("economics: years and discount rate must be non-negative");
  if (const auto* set = std::get_if<ScenarioSet>(&stochastic)) {
    if (set->site_id != site.site_id)
      throw InvariantError("case: scenario set " + set->set_id + " belongs to site " +
                           set->site_id + ", not " + site.site_id);
    if (set->days.empty()) throw InvariantError("case: empty scenario set " + set->set_id);
    const auto T = set->days.front().da.size();
    for (const auto& d : set->days)
      if (d.da.size() != T || d.wind_factor.size() != T || d.res.size() != T)
        throw InvariantError("case: scenario days of unequal length in " + set->set_id);
  } else {
    const auto& tree = std::get<ScenarioTree>(stochastic);
    if (tree.site_id != site.site_id)
      throw InvariantError("case: scenario tree " + tree.tree_id + " belongs to site " +
                           tree.site_id + ", not " + site.site_id);
  }
}

namespace {

struct BlockInput {
  std::string label;
  double weight;
  std::vector<double> wind_mw;
  std::vector<double> energy_price;
  std::vector<double> reserve_price;
};

// Adds one block's dispatch variables and physical rows. Objective coefficients are the
// caller's job because they differ between formulations.
DispatchBlock add_block(lp::LinearProgram& lp, const BlockInput& in, int power, double eta,
                        double duration, double interconnect) {
  DispatchBlock b;
  b.label = in.label;
  b.weight = in.weight;
  b.wind_mw = in.wind_mw;
  b.energy_price = in.energy_price;
  b.reserve_price = in.reserve_price;
  const std::size_t T = in.wind_mw.size();
  const auto tag = [&](const char* v, std::size_t t) {
    return std::string(v) + "[" + in.label + "," + std::to_string(t) + "]";
  };
  for (std::size_t t = 0; t < T; ++t) {
    b.u.push_back(lp.add_variable(tag("u", t), 0, lp::kInf));
    b.c.push_back(lp.add_variable(tag("c", t), 0, lp::kInf));
    b.g.push_back(lp.add_variable(tag("g", t), 0, lp::kInf));
    b.r.push_back(lp.add_variable(tag("r", t), 0, lp::kInf));
  }
  for (std::size_t t = 0; t <= T; ++t) b.e.push_back(lp.add_variable(tag("e", t), 0, lp::kInf));

  for (std::size_t t = 0; t < T; ++t) {
    const int u = b.u[t], c = b.c[t], g = b.g[t], r = b.r[t], e = b.e[t], e1 = b.e[t + 1];
    lp.add_constraint({{u, 1}, {c, 1}}, Relation::LessEqual, in.wind_mw[t]);       // wind split
    lp.add_constraint({{u, 1}, {g, 1}}, Relation::LessEqual, interconnect);        // export limit
    lp.add_constraint({{c, 1}, {power, -1}}, Relation::LessEqual, 0);              // charge rate
    lp.add_constraint({{g, 1}, {power, -1}}, Relation::LessEqual, 0);              // discharge rate
    lp.add_constraint({{r, 1}, {g, 1}, {power, -1}}, Relation::LessEqual, 0);      // reserve headroom
    lp.add_constraint({{r, 1}, {e, -eta}}, Relation::LessEqual, 0);                // reserve backing
    lp.add_constraint({{e1, 1}, {e, -1}, {c, -eta}, {g, 1.0 / eta}}, Relation::Equal, 0);  // SoC
  }
  for (std::size_t t = 0; t <= T; ++t)
    lp.add_constraint({{b.e[t], 1}, {power, -duration}}, Relation::LessEqual, 0);
  lp.add_constraint({{b.e.front(), 1}, {power, -duration / 2}}, Relation::Equal, 0);
  lp.add_constraint({{b.e.back(), 1}, {power, -duration / 2}}, Relation::Equal, 0);
  return b;
}

DesignModel base_model(const SizingCase& c) {
  DesignModel m;
  m.annuity_days = c.economics.annuity_days();
  m.cost_per_mw = 1000.0 * c.battery.cost_usd_per_kw;
  m.eta = std::sqrt(c.battery.rte);
  m.duration_h = c.battery.duration_h;
  m.interconnect_mw = c.site.interconnect_mw;
  m.power_var = m.lp.add_variable("P", 0, c.battery.rating_mw, -m.cost_per_mw);
  return m;
}

}  // namespace

DesignModel build_model_a(const SizingCase& c) {
  c.check();
  const auto& set = std::get<ScenarioSet>(c.stochastic);
  DesignModel m = base_model(c);
  m.hours = set.days.front().da.size();
  const double weight = set.probability();
  for (std::size_t s = 0; s < set.days.size(); ++s) {
    const auto& day = set.days[s];
    BlockInput in{std::to_string(s), weight, {}, day.da, day.res};
    for (double f : day.wind_factor) in.wind_mw.push_back(c.site.capacity_mw * f);
    auto b = add_block(m.lp, in, m.power_var, m.eta, m.duration_h, m.interconnect_mw);
    const double k = m.annuity_days * weight;
    for (std::size_t t = 0; t < m.hours; ++t) {
      m.lp.set_objective(b.u[t], k * day.da[t]);
      m.lp.set_objective(b.g[t], k * day.da[t]);
      m.lp.set_objective(b.r[t], k * day.res[t]);
    }
    m.blocks.push_back(std::move(b));
  }
  return m;
}

DesignModel build_model_b(const SizingCase& c) {
  c.check();
  const auto& tree = std::get<ScenarioTree>(c.stochastic);
  auto report = scenario::validate_tree(tree);
  if (!report.ok())
    throw TreeInvalid("tree " + tree.tree_id + ": " + to_string(report.findings.front()));

  DesignModel m = base_model(c);
  std::vector<int> stage1;
  for (const auto& n : tree.nodes)
    if (n.stage == 1) stage1.push_back(n.id);
  m.hours = tree.node(stage1.front()).da.size();

  // Day-ahead commitments live on stage-1 nodes and are shared by their children.
  std::vector<std::vector<int>> q(stage1.size());
  for (std::size_t i = 0; i < stage1.size(); ++i)
    for (std::size_t t = 0; t < m.hours; ++t)
      q[i].push_back(m.lp.add_variable(
          "q[" + std::to_string(stage1[i]) + "," + std::to_string(t) + "]", 0, m.interconnect_mw));

  for (std::size_t i = 0; i < stage1.size(); ++i) {
    const auto& parent = tree.node(stage1[i]);
    for (int leaf_id : tree.children(parent.id)) {
      const auto& leaf = tree.node(leaf_id);
      const double pi = tree.absolute_probability(leaf_id);
      BlockInput in{std::to_string(leaf_id), pi, {}, leaf.rt, leaf.res};
      for (double f : tree.leaf_wind(leaf_id)) in.wind_mw.push_back(c.site.capacity_mw * f);
      auto b = add_block(m.lp, in, m.power_var, m.eta, m.duration_h, m.interconnect_mw);
      b.q = q[i];
      b.commit_price = parent.da;
      const double k = m.annuity_days * pi;
      for (std::size_t t = 0; t < m.hours; ++t) {
        m.lp.set_objective(b.u[t], k * leaf.rt[t]);
        m.lp.set_objective(b.g[t], k * leaf.rt[t]);
        m.lp.set_objective(b.r[t], k * leaf.res[t]);
        const int qv = q[i][t];
        m.lp.set_objective(qv, m.lp.objective()[qv] + k * (parent.da[t] - leaf.rt[t]));
      }
      m.blocks.push_back(std::move(b));
    }
  }
  return m;
}

double daily_revenue(const DesignModel& m, const std::vector<double>& x) {
  double total = 0;
  for (const auto& b : m.blocks) {
    double day = 0;
    for (std::size_t t = 0; t < b.u.size(); ++t) {
      day += b.energy_price[t] * (x[b.u[t]] + x[b.g[t]]) + b.reserve_price[t] * x[b.r[t]];
      if (!b.q.empty()) day += (b.commit_price[t] - b.energy_price[t]) * x[b.q[t]];
    }
    total += b.weight * day;
  }
  return total;
}

LifetimeValue net_value(double daily_revenue_usd, const BatteryConfig& battery, double power_mw,
                        const Economics& economics) {
  LifetimeValue v;
  v.gross_usd = daily_revenue_usd * economics.annuity_days();
  v.cost_usd = 1000.0 * battery.cost_usd_per_kw * power_mw;
  v.net_usd = v.gross_usd - v.cost_usd;
  return v;
}

namespace {

DesignResult result_skeleton(const SizingCase& c) {
  DesignResult r;
  r.site_id = c.site.site_id;
  r.battery_id = c.battery.config_id;
  r.chemistry = c.battery.chemistry;
  r.duration_h = c.battery.duration_h;
  r.rating_mw = c.battery.rating_mw;
  r.stochastic_id = c.stochastic_id();
  return r;
}

}  // namespace

DesignResult solve_design(const SizingCase& c, const lp::SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  DesignModel model = c.uses_tree() ? build_model_b(c) : build_model_a(c);
  auto sol = lp::solve_lp(model.lp, options);
  DesignResult r = result_skeleton(c);
  r.status = sol.status;
  r.iterations = sol.iterations;
  if (sol.status == lp::SolveStatus::Optimal) {
    r.p_star_mw = std::clamp(sol.x[model.power_var], 0.0, c.battery.rating_mw);
    r.e_star_mwh = r.p_star_mw * c.battery.duration_h;
    r.daily_rev_usd = daily_revenue(model, sol.x);
    auto v = net_value(r.daily_rev_usd, c.battery, r.p_star_mw, c.economics);
    r.gross_usd = v.gross_usd;
    r.cost_usd = v.cost_usd;
    r.net_usd = v.net_usd;
  }
  r.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---- csv / json -----------------------------------------------------------

std::string design_csv_header() {
  return "site_id,battery_id,chemistry,duration_h,rating_mw,stochastic_id,p_star_mw,e_star_mwh,"
         "daily_rev_usd,gross_usd,cost_usd,net_usd,status,solve_ms,iterations";
}

std::string design_csv_row(const DesignResult& r, bool include_timing) {
  std::string out;
  out += csv_field(r.site_id) + "," + csv_field(r.battery_id) + "," + csv_field(r.chemistry) + ",";
  out += format_number(r.duration_h) + "," + format_number(r.rating_mw) + ",";
  out += csv_field(r.stochastic_id) + ",";
  out += format_number(r.p_star_mw) + "," + format_number(r.e_star_mwh) + ",";
  out += format_number(r.daily_rev_usd) + "," + format_number(r.gross_usd) + ",";
  out += format_number(r.cost_usd) + "," + format_number(r.net_usd) + ",";
  out += std::string(lp::to_string(r.status)) + ",";
  out += include_timing ? format_number(r.solve_ms) : std::string("-");
  out += "," + std::to_string(r.iterations);
  return out;
}

void to_json(json& j, const DesignResult& r) {
  j = json{{"site_id", r.site_id},         {"battery_id", r.battery_id},
           {"chemistry", r.chemistry},     {"duration_h", r.duration_h},
           {"rating_mw", r.rating_mw},     {"stochastic_id", r.stochastic_id},
           {"p_star_mw", r.p_star_mw},     {"e_star_mwh", r.e_star_mwh},
           {"daily_rev_usd", r.daily_rev_usd}, {"gross_usd", r.gross_usd},
           {"cost_usd", r.cost_usd},       {"net_usd", r.net_usd},
           {"status", lp::to_string(r.status)}, {"solve_ms", r.solve_ms},
           {"iterations", r.iterations}};
}

void from_json(const json& j, DesignResult& r) {
  j.at("site_id").get_to(r.site_id);
  j.at("battery_id").get_to(r.battery_id);
  j.at("chemistry").get_to(r.chemistry);
  j.at("duration_h").get_to(r.duration_h);
  j.at("rating_mw").get_to(r.rating_mw);
  j.at("stochastic_id").get_to(r.stochastic_id);
  j.at("p_star_mw").get_to(r.p_star_mw);
  j.at("e_star_mwh").get_to(r.e_star_mwh);
  j.at("daily_rev_usd").get_to(r.daily_rev_usd);
  j.at("gross_usd").get_to(r.gross_usd);
  j.at("cost_usd").get_to(r.cost_usd);
  j.at("net_usd").get_to(r.net_usd);
  auto status = j.at("status").get<std::string>();
  if (status == "Optimal") r.status = lp::SolveStatus::Optimal;
  else if (status == "Infeasible") r.status = lp::SolveStatus::Infeasible;
  else if (status == "Unbounded") r.status = lp::SolveStatus::Unbounded;
  else throw ParseError("design result", 0, 0, "unknown status '" + status + "'");
  r.solve_ms = j.value("solve_ms", 0.0);
  r.iterations = j.value("iterations", 0);
}

void to_json(json& j, const Economics& e) {
  j = json{{"years", e.years}, {"discount_rate", e.discount_rate}};
}

void from_json(const json& j, Economics& e) {
  e.years = j.value("years", 30);
  e.discount_rate = j.value("discount_rate", 0.0);
}

}  // namespace cameo::opt
