#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "cameo/errors.hpp"
#include "cameo/summary.hpp"

namespace cameo::report {

namespace {

GroupKey key_of(const opt::DesignResult& r) { return {r.site_id, r.chemistry, r.duration_h, r.rating_mw}; }

}  // namespace

std::vector<std::string> SummaryTable::sites() const {
  std::set<std::string> s;
  for (const auto& g : groups) s.insert(g.key.site_id);
  return {s.begin(), s.end()};
}

SummaryTable consolidate_results(std::vector<opt::DesignResult> results) {
  if (results.empty()) throw EmptyInput("no design results to consolidate");
  std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    const GroupKey ka = key_of(a), kb = key_of(b);
    return std::tie(ka, a.stochastic_id, a.battery_id) < std::tie(kb, b.stochastic_id, b.battery_id);
  });
  SummaryTable table;
  std::map<GroupKey, std::vector<double>> values;
  for (const auto& r : results) values[key_of(r)].push_back(r.e_star_mwh);
  for (const auto& [key, e] : values) {
    GroupAggregate g;
    g.key = key;
    g.n = e.size();
    double sum = 0;
    for (double x : e) sum += x;
    g.mean_e_mwh = sum / static_cast<double>(g.n);
    if (g.n > 1) {
      double ss = 0;
      for (double x : e) ss += (x - g.mean_e_mwh) * (x - g.mean_e_mwh);
      g.std_e_mwh = std::sqrt(ss / static_cast<double>(g.n - 1));
    }
    table.groups.push_back(g);
  }
  table.rows = std::move(results);
  return table;
}

std::string consolidated_csv(const SummaryTable& table) {
  std::string out = opt::design_csv_header() + "\n";
  for (const auto& r : table.rows) out += opt::design_csv_row(r, false) + "\n";
  out += std::string(kAggregatesMarker) + "\n" + std::string(kAggregatesHeader) + "\n";
  for (const auto& g : table.groups) {
    out += csv_field(g.key.site_id) + "," + csv_field(g.key.chemistry) + "," + format_number(g.key.duration_h) + "," +
           format_number(g.key.rating_mw) + "," + std::to_string(g.n) + "," + format_number(g.mean_e_mwh) + "," +
           format_number(g.std_e_mwh) + "\n";
  }
  return out;
}

}  // namespace cameo::report
