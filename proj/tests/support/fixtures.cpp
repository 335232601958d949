#include "fixtures.hpp"

#include <cstdlib>
#include <stdexcept>

namespace cameo::testing {

TempDir::TempDir(const std::string& prefix) {
  std::string tmpl = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

domain::WindFarmSite tiny_site(double capacity, double interconnect) {
  return {"h1", "Hand", -120, 40, capacity, interconnect};
}

domain::DayProfile day_of(const std::vector<double>& factor, const std::vector<double>& da,
                          const std::vector<double>& rt, const std::vector<double>& res) {
  domain::DayProfile d;
  d.date = "2023-01-01";
  d.wind_ms.assign(factor.size(), 0);
  d.wind_factor = factor;
  d.da = da;
  d.rt = rt;
  d.res = res;
  return d;
}

opt::SizingCase set_case(domain::WindFarmSite site, domain::BatteryConfig battery, domain::DayProfile day) {
  scenario::ScenarioSet set;
  set.set_id = site.site_id + "-set00";
  set.site_id = site.site_id;
  set.day_index = {0};
  set.days = {std::move(day)};
  opt::SizingCase c;
  c.site = std::move(site);
  c.battery = std::move(battery);
  c.stochastic = std::move(set);
  return c;
}

}  // namespace

opt::SizingCase hand_instance(double cost_usd_per_kw) {
  domain::BatteryConfig b{"hand", "chem", 1, 1, cost_usd_per_kw, 1};
  return set_case(tiny_site(1, 10), b, day_of({1, 0}, {0, 100}, {0, 100}, {0, 0}));
}

opt::SizingCase random_tiny_case(std::uint64_t seed, std::size_t hours) {
  Rng rng(seed);
  std::vector<double> f, da, res;
  for (std::size_t t = 0; t < hours; ++t) {
    f.push_back(rng.uniform());
    da.push_back(std::round(200 * rng.uniform()) / 2);
    res.push_back(rng.uniform() < 0.5 ? 0 : std::round(40 * rng.uniform()) / 2);
  }
  const double capacity = 1 + std::round(9 * rng.uniform());
  const double interconnect = 0.5 + std::round(10 * rng.uniform()) / 2;
  const double rating = 1 + std::round(4 * rng.uniform());
  const double duration = 1 + std::round(3 * rng.uniform());
  const double rte = 0.7 + 0.3 * rng.uniform();
  const double cost = std::round(400 * rng.uniform());
  domain::BatteryConfig b{"rand", "chem", duration, rating, cost, rte};
  return set_case(tiny_site(capacity, interconnect), b, day_of(f, da, da, res));
}

CollapsePair collapse_pair(std::uint64_t seed, std::size_t hours) {
  CollapsePair p;
  p.a = random_tiny_case(seed, hours);
  const auto& day = std::get<scenario::ScenarioSet>(p.a.stochastic).days.front();
  scenario::ScenarioTree tree;
  tree.tree_id = p.a.site.site_id + "-tree";
  tree.site_id = p.a.site.site_id;
  scenario::TreeNode root;
  root.id = 0;
  root.stage = 0;
  scenario::TreeNode s1;
  s1.id = 1;
  s1.stage = 1;
  s1.parent = 0;
  s1.da = day.da;
  s1.wind = day.wind_factor;
  scenario::TreeNode s2;
  s2.id = 2;
  s2.stage = 2;
  s2.parent = 1;
  s2.rt = day.da;
  s2.wind_dev.assign(hours, 0);
  s2.res = day.res;
  tree.nodes = {root, s1, s2};
  p.b = p.a;
  p.b.stochastic = tree;
  return p;
}

std::string exec_sweep_workflow(std::size_t n, const std::string& command, int retries) {
  json values = json::array();
  for (std::size_t i = 0; i < n; ++i) values.push_back(i);
  json doc = {{"schema_version", 1},
              {"name", "sweep"},
              {"params", json::object()},
              {"channels", json::array({{{"name", "items"},
                                         {"source", {{"type", "literal"}, {"values", values}}},
                                         {"ops", json::array()}}})},
              {"processes", json::array({{{"name", "work"},
                                          {"kind", {{"exec", command}}},
                                          {"inputs", {{"x", "items"}}},
                                          {"outputs", {{"y", "Scalar"}}},
                                          {"retries", retries},
                                          {"retry_backoff_ms", 10},
                                          {"tag", "{x}"}}})}};
  return doc.dump(2);
}

}  // namespace cameo::testing
