#include <doctest.h>

#include <numeric>
#include <set>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"
#include "cameo/scenario.hpp"

using namespace cameo;
using namespace cameo::scenario;

namespace {

HistoricalRecord history(std::size_t days, std::uint64_t seed = 42) {
  return domain::generate_synthetic_history(domain::demo_sites()[0], seed, days);
}

HistoricalRecord identical_days(std::size_t days) {
  HistoricalRecord r = history(1);
  const auto day = r;
  for (std::size_t d = 1; d < days; ++d) {
    r.wind_ms.insert(r.wind_ms.end(), day.wind_ms.begin(), day.wind_ms.end());
    r.da_usd_mwh.insert(r.da_usd_mwh.end(), day.da_usd_mwh.begin(), day.da_usd_mwh.end());
    r.rt_usd_mwh.insert(r.rt_usd_mwh.end(), day.rt_usd_mwh.begin(), day.rt_usd_mwh.end());
    r.res_usd_mw.insert(r.res_usd_mw.end(), day.res_usd_mw.begin(), day.res_usd_mw.end());
  }
  return r;
}

double leaf_total(const ScenarioTree& t) {
  double s = 0;
  for (int l : t.leaves()) s += t.absolute_probability(l);
  return s;
}

ScenarioTree tiny_tree() {
  ScenarioTree t;
  t.tree_id = "t";
  t.site_id = "s";
  TreeNode root;
  TreeNode mid;
  mid.id = 1;
  mid.stage = 1;
  mid.parent = 0;
  mid.da.assign(24, 10);
  mid.wind.assign(24, 0.5);
  TreeNode leaf;
  leaf.id = 2;
  leaf.stage = 2;
  leaf.parent = 1;
  leaf.rt.assign(24, 11);
  leaf.wind_dev.assign(24, 0);
  leaf.res.assign(24, 1);
  t.nodes = {root, mid, leaf};
  return t;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("sets draw distinct days with uniform probability") {
    const auto h = history(60);
    const auto sets = sample_scenario_sets(h, 10, 10, 7);
    REQUIRE(sets.size() == 10);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto& s = sets[i];
      CHECK(s.size() == 10);
      CHECK(s.probability() == doctest::Approx(0.1));
      CHECK(std::set<std::size_t>(s.day_index.begin(), s.day_index.end()).size() == 10);
      CHECK(std::is_sorted(s.day_index.begin(), s.day_index.end()));
      CHECK(s.day_index.back() < 60);
      char id[16];
      std::snprintf(id, sizeof id, "-set%02zu", i);
      CHECK(s.set_id == h.site_id + id);
    }
    CHECK(sets[0].day_index != sets[1].day_index);
  }

  TEST_CASE("sets are reproducible from the seed") {
    const auto h = history(40);
    CHECK(sample_scenario_sets(h, 3, 5, 11) == sample_scenario_sets(h, 3, 5, 11));
    CHECK(sample_scenario_sets(h, 3, 5, 11) != sample_scenario_sets(h, 3, 5, 12));
  }

  TEST_CASE("asking for more days than the history holds fails") {
    CHECK_THROWS_AS(sample_scenario_sets(history(5), 1, 6, 1), InsufficientData);
    CHECK_THROWS_AS(sample_scenario_sets(history(5), 1, 0, 1), InsufficientData);
    CHECK(sample_scenario_sets(history(5), 1, 5, 1)[0].day_index == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }

  TEST_CASE("property: sampled days are roughly uniform across the history") {
    const auto h = history(20);
    std::vector<int> hits(20, 0);
    const auto sets = sample_scenario_sets(h, 2000, 5, 3);
    for (const auto& s : sets)
      for (auto d : s.day_index) ++hits[d];
    for (int n : hits) CHECK(n == doctest::Approx(500).epsilon(0.15));
  }

  TEST_CASE("default tree has 4 and 12 nodes below the root") {
    const auto t = build_scenario_tree(history(120), {}, 42);
    CHECK(t.nodes.size() == 17);
    CHECK(t.children(0).size() == 4);
    CHECK(t.leaves().size() == 12);
    CHECK(validate_tree(t).ok());
    CHECK(leaf_total(t) == doctest::Approx(1.0));
    CHECK(t.tree_id == "s1-tree");
  }

  TEST_CASE("property: leaves partition the history") {
    for (int b1 : {1, 2, 4})
      for (int b2 : {1, 3}) {
        const auto h = history(40, static_cast<std::uint64_t>(b1 * 10 + b2));
        const auto t = build_scenario_tree(h, {b1, b2}, 5);
        CHECK(validate_tree(t).ok());
        std::vector<std::size_t> all;
        for (int l : t.leaves()) {
          const auto& m = t.node(l).members;
          all.insert(all.end(), m.begin(), m.end());
          CHECK(t.node(l).probability == doctest::Approx(static_cast<double>(m.size()) /
                                                         static_cast<double>(t.node(t.node(l).parent).members.size())));
        }
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(h.days());
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(all == expected);
        for (int j : t.children(0)) CHECK(t.children(j).size() == static_cast<std::size_t>(b2));
      }
  }

  TEST_CASE("a (1,1) tree is the mean day") {
    const auto h = history(10);
    const auto t = build_scenario_tree(h, {1, 1}, 1);
    REQUIRE(t.nodes.size() == 3);
    const auto days = domain::slice_days(h, {});
    double mean_da0 = 0;
    for (const auto& d : days) mean_da0 += d.da[0];
    CHECK(t.node(1).da[0] == doctest::Approx(mean_da0 / 10));
    CHECK(t.absolute_probability(2) == 1);
  }

  TEST_CASE("identical days still yield a valid tree") {
    const auto t = build_scenario_tree(identical_days(12), {4, 3}, 9);
    CHECK(validate_tree(t).ok());
    CHECK(leaf_total(t) == doctest::Approx(1.0));
    for (int l : t.leaves()) CHECK(t.node(l).members.size() == 1);
  }

  TEST_CASE("too little history for the branching fails") {
    CHECK_THROWS_AS(build_scenario_tree(history(11), {4, 3}, 1), InsufficientData);
    CHECK_THROWS_AS(build_scenario_tree(history(11), {0, 3}, 1), InsufficientData);
  }

  TEST_CASE("trees are reproducible from the seed") {
    const auto h = history(60);
    CHECK(build_scenario_tree(h, {}, 3) == build_scenario_tree(h, {}, 3));
  }

  TEST_CASE("validation flags broken trees") {
    CHECK(validate_tree(tiny_tree()).ok());

    auto t = tiny_tree();
    t.nodes[2].probability = 0.5;
    CHECK(validate_tree(t).contains("children probabilities sum to 0.5"));

    t = tiny_tree();
    t.nodes[2].parent = 7;
    CHECK(validate_tree(t).contains("orphan node"));

    t = tiny_tree();
    t.nodes[2].stage = 1;
    CHECK_FALSE(validate_tree(t).ok());

    t = tiny_tree();
    t.nodes[2].rt.pop_back();
    CHECK(validate_tree(t).contains("payload length of rt is 23"));

    t = tiny_tree();
    t.nodes[1].parent = -1;
    t.nodes[1].stage = 0;
    CHECK(validate_tree(t).contains("expected exactly one root"));
  }

  TEST_CASE("leaf wind is clamped to the unit interval") {
    auto t = tiny_tree();
    t.nodes[2].wind_dev.assign(24, 0.7);
    for (double w : t.leaf_wind(2)) CHECK(w == 1.0);
    t.nodes[2].wind_dev.assign(24, -0.7);
    for (double w : t.leaf_wind(2)) CHECK(w == 0.0);
  }

  TEST_CASE("k-means separates two obvious groups") {
    std::vector<std::vector<double>> pts = {{0, 0}, {0.1, 0}, {0, 0.1}, {10, 10}, {10.1, 10}, {10, 10.1}};
    const auto c = kmeans(pts, 2, 1);
    CHECK(c.assignment[0] == c.assignment[1]);
    CHECK(c.assignment[1] == c.assignment[2]);
    CHECK(c.assignment[3] == c.assignment[4]);
    CHECK(c.assignment[0] != c.assignment[3]);
    CHECK(kmeans(pts, 2, 1).assignment == kmeans(pts, 2, 1).assignment);
  }

  TEST_CASE("tree and set payloads round-trip") {
    const auto h = history(24);
    const auto t = build_scenario_tree(h, {2, 2}, 4);
    CHECK(json(t).get<ScenarioTree>() == t);
    const auto s = sample_scenario_sets(h, 1, 3, 2)[0];
    CHECK(json(s).get<ScenarioSet>() == s);
    CHECK(split(tree_edge_list_csv(t), '\n')[0] == "parent,child,stage,conditional_probability,absolute_probability");
  }
}
