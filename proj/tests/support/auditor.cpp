#include "auditor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cameo::testing {

namespace {

class Auditor {
 public:
  Auditor(const lp::LinearProgram& model, const std::vector<double>& x) : model_(model), x_(x) {}

  double var(const std::string& name) const {
    const int i = model_.find(name);
    if (i < 0) throw std::runtime_error("auditor: model has no variable " + name);
    return x_.at(static_cast<std::size_t>(i));
  }

  void le(double lhs, double rhs, const std::string& what) { note(lhs - rhs, what); }
  void eq(double lhs, double rhs, const std::string& what) { note(std::abs(lhs - rhs), what); }

  AuditReport report;

 private:
  void note(double v, const std::string& what) {
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst = what;
    }
  }

  const lp::LinearProgram& model_;
  const std::vector<double>& x_;
};

std::string key(const char* v, const std::string& block, std::size_t t) {
  return std::string(v) + "[" + block + "," + std::to_string(t) + "]";
}

/// Physical constraints of one dispatch block; returns its weighted revenue terms.
void audit_block(Auditor& a, const std::string& block, const std::vector<double>& wind_mw, double P,
                 const opt::SizingCase& c) {
  const double eta = std::sqrt(c.battery.rte);
  const double I = c.site.interconnect_mw;
  const double E = P * c.battery.duration_h;
  const std::size_t T = wind_mw.size();
  a.eq(a.var(key("e", block, 0)), E / 2, "initial SoC " + block);
  a.eq(a.var(key("e", block, T)), E / 2, "final SoC " + block);
  for (std::size_t t = 0; t <= T; ++t) {
    const double e = a.var(key("e", block, t));
    a.le(-e, 0, "SoC sign " + key("e", block, t));
    a.le(e, E, "SoC capacity " + key("e", block, t));
  }
  for (std::size_t t = 0; t < T; ++t) {
    const double u = a.var(key("u", block, t)), ch = a.var(key("c", block, t)), g = a.var(key("g", block, t)),
                 r = a.var(key("r", block, t)), e = a.var(key("e", block, t)), e1 = a.var(key("e", block, t + 1));
    const std::string at = block + "," + std::to_string(t);
    for (double v : {u, ch, g, r}) a.le(-v, 0, "sign at " + at);
    a.le(u + ch, wind_mw[t], "wind split at " + at);
    a.le(u + g, I, "export limit at " + at);
    a.le(ch, P, "charge rate at " + at);
    a.le(g, P, "discharge rate at " + at);
    a.le(r, P - g, "reserve headroom at " + at);
    a.le(r, eta * e, "reserve backing at " + at);
    a.eq(e1, e + eta * ch - g / eta, "SoC recursion at " + at);
  }
}

}  // namespace

AuditReport audit_solution(const opt::SizingCase& c, const lp::LinearProgram& model, const std::vector<double>& x) {
  Auditor a(model, x);
  const double P = a.var("P");
  a.le(-P, 0, "P sign");
  a.le(P, c.battery.rating_mw, "P rating");
  double A = 0;
  for (int y = 1; y <= c.economics.years; ++y) A += 365.0 / std::pow(1.0 + c.economics.discount_rate, y);
  double daily = 0;

  if (const auto* set = std::get_if<scenario::ScenarioSet>(&c.stochastic)) {
    const double w = 1.0 / static_cast<double>(set->days.size());
    for (std::size_t s = 0; s < set->days.size(); ++s) {
      const auto& day = set->days[s];
      const std::string block = std::to_string(s);
      std::vector<double> wind;
      for (double f : day.wind_factor) wind.push_back(c.site.capacity_mw * f);
      audit_block(a, block, wind, P, c);
      for (std::size_t t = 0; t < wind.size(); ++t)
        daily += w * (day.da[t] * (a.var(key("u", block, t)) + a.var(key("g", block, t))) +
                      day.res[t] * a.var(key("r", block, t)));
    }
  } else {
    const auto& tree = std::get<scenario::ScenarioTree>(c.stochastic);
    for (const auto& leaf : tree.nodes) {
      if (leaf.stage != 2) continue;
      const auto& parent = tree.node(leaf.parent);
      double pi = leaf.probability * parent.probability;
      const std::string block = std::to_string(leaf.id);
      std::vector<double> wind;
      for (std::size_t t = 0; t < parent.wind.size(); ++t)
        wind.push_back(c.site.capacity_mw * std::clamp(parent.wind[t] + leaf.wind_dev[t], 0.0, 1.0));
      audit_block(a, block, wind, P, c);
      for (std::size_t t = 0; t < wind.size(); ++t) {
        const double q = a.var(key("q", std::to_string(parent.id), t));
        a.le(-q, 0, "commitment sign");
        a.le(q, c.site.interconnect_mw, "commitment limit");
        const double sold = a.var(key("u", block, t)) + a.var(key("g", block, t));
        daily += pi * (parent.da[t] * q + leaf.rt[t] * (sold - q) + leaf.res[t] * a.var(key("r", block, t)));
      }
    }
  }
  a.report.objective = A * daily - 1000.0 * c.battery.cost_usd_per_kw * P;
  return a.report;
}

}  // namespace cameo::testing
