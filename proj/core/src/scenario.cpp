#include "cameo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "cameo/errors.hpp"

namespace cameo::scenario {

using domain::kHoursPerDay;

// ---- tree accessors -------------------------------------------------------

const TreeNode& ScenarioTree::node(int id) const {
  for (const auto& n : nodes)
    if (n.id == id) return n;
  throw TreeInvalid("tree " + tree_id + ": no node " + std::to_string(id));
}

std::vector<int> ScenarioTree::children(int id) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.parent == id && n.id != id) out.push_back(n.id);
  return out;
}

std::vector<int> ScenarioTree::leaves() const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (children(n.id).empty()) out.push_back(n.id);
  return out;
}

double ScenarioTree::absolute_probability(int id) const {
  double p = 1;
  for (std::size_t guard = 0; guard <= nodes.size(); ++guard) {
    const auto& n = node(id);
    p *= n.probability;
    if (n.parent < 0) return p;
    id = n.parent;
  }
  throw TreeInvalid("tree " + tree_id + ": parent chain does not reach a root");
}

std::vector<double> ScenarioTree::leaf_wind(int leaf_id) const {
  const auto& leaf = node(leaf_id);
  const auto& parent = node(leaf.parent);
  std::vector<double> w(leaf.wind_dev.size());
  for (std::size_t t = 0; t < w.size(); ++t)
    w[t] = std::clamp(parent.wind[t] + leaf.wind_dev[t], 0.0, 1.0);
  return w;
}

// ---- scenario sets --------------------------------------------------------

std::vector<ScenarioSet> sample_scenario_sets(const HistoricalRecord& history, std::size_t n_sets,
                                              std::size_t n_days, std::uint64_t seed,
                                              const PowerCurve& curve) {
  auto days = domain::slice_days(history, curve);
  if (n_days == 0 || days.size() < n_days)
    throw InsufficientData("scenario sets for " + history.site_id + ": need " +
                           std::to_string(n_days) + " days, history has " +
                           std::to_string(days.size()));
  std::vector<ScenarioSet> sets;
  sets.reserve(n_sets);
  for (std::size_t i = 0; i < n_sets; ++i) {
    ScenarioSet s;
    s.site_id = history.site_id;
    s.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof id, "-set%02zu", i);
    s.set_id = history.site_id + id;

    // Partial Fisher-Yates: the first n_days slots become a uniform draw without replacement.
    Rng rng(s.seed);
    std::vector<std::size_t> pool(days.size());
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t k = 0; k < n_days; ++k) {
      auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
    }
    s.day_index.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_days));
    std::sort(s.day_index.begin(), s.day_index.end());
    for (auto d : s.day_index) s.days.push_back(days[d]);
    sets.push_back(std::move(s));
  }
  return sets;
}

// ---- scenario tree --------------------------------------------------------

namespace {

std::vector<double> concat(std::initializer_list<const std::vector<double>*> parts) {
  std::vector<double> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

std::vector<double> mean_of(const std::vector<const std::vector<double>*>& series) {
  std::vector<double> m(kHoursPerDay, 0.0);
  for (const auto* s : series)
    for (std::size_t t = 0; t < kHoursPerDay; ++t) m[t] += (*s)[t];
  for (double& v : m) v /= static_cast<double>(series.size());
  return m;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Every stage-1 cluster needs at least `min_size` members so that its stage-2 split exists.
// Deficient clusters pull the nearest point from clusters that can spare one.
void enforce_min_size(const std::vector<std::vector<double>>& points, std::vector<int>& assignment,
                      int k, std::size_t min_size) {
  for (;;) {
    std::vector<std::size_t> count(k, 0);
    for (int a : assignment) ++count[a];
    int needy = -1;
    for (int j = 0; j < k; ++j)
      if (count[j] < min_size) {
        needy = j;
        break;
      }
    if (needy < 0) return;
    std::vector<double> centroid(points.front().size(), 0.0);
    if (count[needy]) {
      for (std::size_t p = 0; p < points.size(); ++p)
        if (assignment[p] == needy)
          for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += points[p][d];
      for (double& v : centroid) v /= static_cast<double>(count[needy]);
    }
    std::size_t pick = points.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (assignment[p] == needy || count[assignment[p]] <= min_size) continue;
      double d = sq_dist(points[p], centroid);
      if (d < best) {
        best = d;
        pick = p;
      }
    }
    if (pick == points.size()) throw InsufficientData("scenario tree: cannot populate clusters");
    assignment[pick] = needy;
  }
}

}  // namespace

ScenarioTree build_scenario_tree(const HistoricalRecord& history, Branching branching,
                                 std::uint64_t seed, const KMeansConfig& config,
                                 const PowerCurve& curve) {
  if (branching.stage1 < 1 || branching.stage2 < 1)
    throw InsufficientData("scenario tree: branching factors must be >= 1");
  auto days = domain::slice_days(history, curve);
  const auto b1 = static_cast<std::size_t>(branching.stage1);
  const auto b2 = static_cast<std::size_t>(branching.stage2);
  if (days.size() < b1 * b2)
    throw InsufficientData("scenario tree for " + history.site_id + ": need " +
                           std::to_string(b1 * b2) + " days, history has " +
                           std::to_string(days.size()));

  ScenarioTree tree;
  tree.site_id = history.site_id;
  tree.tree_id = history.site_id + "-tree";
  tree.seed = seed;

  TreeNode root;
  root.id = 0;
  root.stage = 0;
  root.parent = -1;
  root.probability = 1;
  root.members.resize(days.size());
  std::iota(root.members.begin(), root.members.end(), 0);
  tree.nodes.push_back(root);

  // Stage 1: day-ahead information (da prices and wind factor).
  std::vector<std::vector<double>> f1;
  f1.reserve(days.size());
  for (const auto& d : days) f1.push_back(concat({&d.da, &d.wind_factor}));
  auto z1 = standardize(f1);
  auto c1 = kmeans(z1, branching.stage1, derive_seed(seed, std::uint64_t{0}), config);
  enforce_min_size(z1, c1.assignment, branching.stage1, b2);

  std::vector<std::vector<std::size_t>> members1(b1);
  for (std::size_t d = 0; d < days.size(); ++d) members1[c1.assignment[d]].push_back(d);

  int next_id = 1 + branching.stage1;
  std::vector<TreeNode> leaves;
  for (std::size_t j = 0; j < b1; ++j) {
    const auto& m = members1[j];
    TreeNode n;
    n.id = static_cast<int>(1 + j);
    n.stage = 1;
    n.parent = 0;
    n.probability = static_cast<double>(m.size()) / static_cast<double>(days.size());
    n.members = m;
    std::vector<const std::vector<double>*> da, wind;
    for (auto d : m) {
      da.push_back(&days[d].da);
      wind.push_back(&days[d].wind_factor);
    }
    n.da = mean_of(da);
    n.wind = mean_of(wind);

    // Stage 2: real-time realization given the stage-1 cluster.
    std::vector<std::vector<double>> f2;
    std::vector<std::vector<double>> dev(m.size(), std::vector<double>(kHoursPerDay));
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& day = days[m[i]];
      for (std::size_t t = 0; t < kHoursPerDay; ++t) dev[i][t] = day.wind_factor[t] - n.wind[t];
      f2.push_back(concat({&day.rt, &dev[i], &day.res}));
    }
    auto z2 = standardize(f2);
    auto c2 = kmeans(z2, branching.stage2, derive_seed(seed, static_cast<std::uint64_t>(j + 1)),
                     config);
    for (std::size_t l = 0; l < b2; ++l) {
      TreeNode leaf;
      leaf.id = next_id++;
      leaf.stage = 2;
      leaf.parent = n.id;
      std::vector<const std::vector<double>*> rt, wd, res;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (c2.assignment[i] != static_cast<int>(l)) continue;
        leaf.members.push_back(m[i]);
        rt.push_back(&days[m[i]].rt);
        wd.push_back(&dev[i]);
        res.push_back(&days[m[i]].res);
      }
      leaf.probability = static_cast<double>(leaf.members.size()) / static_cast<double>(m.size());
      leaf.rt = mean_of(rt);
      leaf.wind_dev = mean_of(wd);
      leaf.res = mean_of(res);
      leaves.push_back(std::move(leaf));
    }
    tree.nodes.push_back(std::move(n));
  }
  for (auto& l : leaves) tree.nodes.push_back(std::move(l));
  return tree;
}

ValidationReport validate_tree(const ScenarioTree& tree) {
  ValidationReport report;
  constexpr double kTol = 1e-9;
  std::map<int, const TreeNode*> by_id;
  for (const auto& n : tree.nodes) {
    if (!by_id.emplace(n.id, &n).second)
      report.error("node " + std::to_string(n.id), "duplicate node id");
  }
  std::size_t roots = 0;
  for (const auto& n : tree.nodes) {
    const std::string subject = "node " + std::to_string(n.id);
    if (n.parent < 0) {
      ++roots;
      if (n.stage != 0) report.error(subject, "root must be stage 0");
      continue;
    }
    auto parent = by_id.find(n.parent);
    if (parent == by_id.end()) {
      report.error(subject, "orphan node: parent " + std::to_string(n.parent) + " does not exist");
      continue;
    }
    if (n.stage != parent->second->stage + 1)
      report.error(subject, "stage " + std::to_string(n.stage) + " does not follow parent stage " +
                                std::to_string(parent->second->stage));
    if (!(n.probability >= 0 && n.probability <= 1))
      report.error(subject, "conditional probability outside [0, 1]");
  }
  if (roots != 1) report.error("tree", "expected exactly one root, found " + std::to_string(roots));

  for (const auto& n : tree.nodes) {
    const std::string subject = "node " + std::to_string(n.id);
    double sum = 0;
    std::size_t nchildren = 0;
    for (const auto& c : tree.nodes)
      if (c.parent == n.id && c.id != n.id) {
        sum += c.probability;
        ++nchildren;
      }
    if (nchildren == 0) {
      if (n.stage != 2) report.error(subject, "leaf not at stage 2");
    } else if (std::abs(sum - 1.0) > kTol) {
      report.error(subject, "children probabilities sum to " + format_number(sum));
    }
    auto check_len = [&](const std::vector<double>& v, const char* name) {
      if (v.size() != kHoursPerDay)
        report.error(subject, std::string("payload length of ") + name + " is " +
                                  std::to_string(v.size()) + ", expected 24");
    };
    if (n.stage == 1) {
      check_len(n.da, "da");
      check_len(n.wind, "wind");
    } else if (n.stage == 2) {
      check_len(n.rt, "rt");
      check_len(n.wind_dev, "wind_dev");
      check_len(n.res, "res");
    }
  }
  if (report.ok()) {
    double total = 0;
    for (int leaf : tree.leaves()) total += tree.absolute_probability(leaf);
    if (std::abs(total - 1.0) > kTol)
      report.error("tree", "leaf probabilities sum to " + format_number(total));
  }
  return report;
}

std::string tree_edge_list_csv(const ScenarioTree& tree) {
  std::string out = "parent,child,stage,conditional_probability,absolute_probability\n";
  for (const auto& n : tree.nodes) {
    if (n.parent < 0) continue;
    out += std::to_string(n.parent) + "," + std::to_string(n.id) + "," + std::to_string(n.stage) +
           "," + format_number(n.probability) + "," +
           format_number(tree.absolute_probability(n.id)) + "\n";
  }
  return out;
}

// ---- json -----------------------------------------------------------------

void to_json(json& j, const ScenarioSet& s) {
  j = json{{"set_id", s.set_id}, {"site_id", s.site_id}, {"seed", s.seed},
           {"day_index", s.day_index}, {"days", s.days}};
}

void from_json(const json& j, ScenarioSet& s) {
  j.at("set_id").get_to(s.set_id);
  j.at("site_id").get_to(s.site_id);
  j.at("seed").get_to(s.seed);
  j.at("day_index").get_to(s.day_index);
  j.at("days").get_to(s.days);
}

void to_json(json& j, const TreeNode& n) {
  j = json{{"id", n.id}, {"stage", n.stage}, {"parent", n.parent}, {"probability", n.probability},
           {"members", n.members}};
  if (!n.da.empty()) j["da"] = n.da;
  if (!n.wind.empty()) j["wind"] = n.wind;
  if (!n.rt.empty()) j["rt"] = n.rt;
  if (!n.wind_dev.empty()) j["wind_dev"] = n.wind_dev;
  if (!n.res.empty()) j["res"] = n.res;
}

void from_json(const json& j, TreeNode& n) {
  j.at("id").get_to(n.id);
  j.at("stage").get_to(n.stage);
  j.at("parent").get_to(n.parent);
  j.at("probability").get_to(n.probability);
  n.members = j.value("members", std::vector<std::size_t>{});
  n.da = j.value("da", std::vector<double>{});
  n.wind = j.value("wind", std::vector<double>{});
  n.rt = j.value("rt", std::vector<double>{});
  n.wind_dev = j.value("wind_dev", std::vector<double>{});
  n.res = j.value("res", std::vector<double>{});
}

void to_json(json& j, const ScenarioTree& t) {
  j = json{{"tree_id", t.tree_id}, {"site_id", t.site_id}, {"seed", t.seed}, {"nodes", t.nodes}};
}

void from_json(const json& j, ScenarioTree& t) {
  j.at("tree_id").get_to(t.tree_id);
  j.at("site_id").get_to(t.site_id);
  j.at("seed").get_to(t.seed);
  j.at("nodes").get_to(t.nodes);
}

}  // namespace cameo::scenario
