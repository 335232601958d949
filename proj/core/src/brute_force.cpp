#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cameo/errors.hpp"
#include "cameo/optimizer.hpp"

namespace cameo::opt {

namespace {

constexpr double kBoundaryTol = 1e-9;

// Best revenue of one day at a fixed P: exhaustive over per-hour (c, g) grid points,
// merging paths that reach the same state of charge (the future only depends on it).
double best_day(const domain::DayProfile& day, double capacity, double interconnect, double power,
                double duration, double eta, double step) {
  const double energy = duration * power;
  const double e0 = energy / 2;
  std::map<double, double> states{{e0, 0.0}};
  const std::size_t T = day.da.size();
  for (std::size_t t = 0; t < T; ++t) {
    const double w = capacity * day.wind_factor[t];
    std::map<double, double> next;
    for (const auto& [e, value] : states) {
      for (int ic = 0; step * ic <= power + 1e-12; ++ic) {
        const double c = std::min(step * ic, power);
        if (c > w + 1e-12) break;
        for (int ig = 0; step * ig <= power + 1e-12; ++ig) {
          const double g = std::min(step * ig, power);
          if (g > interconnect + 1e-12) break;
          const double e1 = e + eta * c - g / eta;
          if (e1 < -1e-12 || e1 > energy + 1e-12) continue;
          const double u = std::max(0.0, std::min(w - c, interconnect - g));
          const double r = day.res[t] > 0 ? std::max(0.0, std::min(power - g, eta * e)) : 0.0;
          const double v = value + day.da[t] * (u + g) + day.res[t] * r;
          const double key = std::clamp(e1, 0.0, energy);
          auto [it, inserted] = next.try_emplace(key, v);
          if (!inserted && v > it->second) it->second = v;
        }
      }
    }
    states = std::move(next);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [e, value] : states)
    if (std::abs(e - e0) <= kBoundaryTol) best = std::max(best, value);
  return best;
}

}  // namespace

DesignResult brute_force_design(const SizingCase& c, int m) {
  c.check();
  if (c.uses_tree()) throw InstanceTooLarge("brute force: scenario-tree cases are not supported");
  if (m < 1 || m > 8) throw InstanceTooLarge("brute force: grid resolution must be in 1..8");
  const auto& set = std::get<ScenarioSet>(c.stochastic);
  const std::size_t hours = set.days.size() * set.days.front().da.size();
  if (hours > 6) throw InstanceTooLarge("brute force: " + std::to_string(hours) + " decision hours exceed 6");

  const double rating = c.battery.rating_mw;
  const double eta = std::sqrt(c.battery.rte);
  const double step = rating / m;
  const double weight = set.probability();

  DesignResult best;
  best.site_id = c.site.site_id;
  best.battery_id = c.battery.config_id;
  best.chemistry = c.battery.chemistry;
  best.duration_h = c.battery.duration_h;
  best.rating_mw = rating;
  best.stochastic_id = c.stochastic_id();
  double best_objective = -std::numeric_limits<double>::infinity();

  const int points = rating > 0 ? m : 0;
  for (int ip = 0; ip <= points; ++ip) {
    const double power = ip == points ? rating : step * ip;
    double daily = 0;
    for (const auto& day : set.days)
      daily += weight * best_day(day, c.site.capacity_mw, c.site.interconnect_mw, power,
                                 c.battery.duration_h, eta, step > 0 ? step : 1.0);
    const auto v = net_value(daily, c.battery, power, c.economics);
    if (v.net_usd > best_objective) {
      best_objective = v.net_usd;
      best.p_star_mw = power;
      best.e_star_mwh = power * c.battery.duration_h;
      best.daily_rev_usd = daily;
      best.gross_usd = v.gross_usd;
      best.cost_usd = v.cost_usd;
      best.net_usd = v.net_usd;
    }
  }
  best.status = lp::SolveStatus::Optimal;
  return best;
}

}  // namespace cameo::opt
