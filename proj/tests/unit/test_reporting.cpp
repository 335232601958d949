#include <doctest.h>

#include <cmath>
#include <map>
#include <regex>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"
#include "cameo/summary.hpp"

using namespace cameo;
using namespace cameo::report;

namespace {

opt::DesignResult result(const std::string& site, const domain::BatteryConfig& b, const std::string& stochastic,
                         double p) {
  opt::DesignResult r;
  r.site_id = site;
  r.battery_id = b.config_id;
  r.chemistry = b.chemistry;
  r.duration_h = b.duration_h;
  r.rating_mw = b.rating_mw;
  r.stochastic_id = stochastic;
  r.p_star_mw = p;
  r.e_star_mwh = p * b.duration_h;
  r.solve_ms = 12.5;
  return r;
}

/// Formulation A shape: sites x sets x catalog results with seeded sizes.
std::vector<opt::DesignResult> sweep_results(std::size_t sites, std::size_t sets, std::uint64_t seed) {
  Rng rng(seed);
  const auto catalog = domain::parse_battery_catalog(domain::demo_battery_catalog());
  std::vector<opt::DesignResult> out;
  for (std::size_t s = 0; s < sites; ++s)
    for (std::size_t k = 0; k < sets; ++k)
      for (const auto& b : catalog) {
        const double p = rng.uniform() < 0.3 ? 0 : b.rating_mw * rng.uniform();
        out.push_back(result("s" + std::to_string(s + 1), b, "s" + std::to_string(s + 1) + "-set0" + std::to_string(k), p));
      }
  return out;
}

std::vector<std::string> aggregate_lines(const std::string& csv) {
  const auto lines = split(csv, '\n');
  auto it = std::find(lines.begin(), lines.end(), std::string(kAggregatesMarker));
  REQUIRE(it != lines.end());
  std::vector<std::string> out(it + 2, lines.end());
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

TEST_SUITE("reporting") {
  TEST_CASE("eight hundred results form eighty groups of ten") {
    const auto table = consolidate_results(sweep_results(5, 10, 1));
    CHECK(table.rows.size() == 800);
    CHECK(table.groups.size() == 80);
    for (const auto& g : table.groups) CHECK(g.n == 10);
    CHECK(table.sites() == std::vector<std::string>{"s1", "s2", "s3", "s4", "s5"});
  }

  TEST_CASE("one result per group has zero spread") {
    const auto table = consolidate_results(sweep_results(5, 1, 2));
    CHECK(table.groups.size() == 80);
    for (const auto& g : table.groups) {
      CHECK(g.n == 1);
      CHECK(g.std_e_mwh == 0);
    }
  }

  TEST_CASE("a single result is a single group") {
    const auto b = domain::parse_battery_catalog(domain::demo_battery_catalog())[0];
    const auto table = consolidate_results({result("s1", b, "x", 3)});
    REQUIRE(table.groups.size() == 1);
    CHECK(table.groups[0].mean_e_mwh == doctest::Approx(3 * b.duration_h));
  }

  TEST_CASE("no results is an error") { CHECK_THROWS_AS(consolidate_results({}), EmptyInput); }

  TEST_CASE("csv rows are sorted and omit solve time") {
    auto results = sweep_results(2, 3, 4);
    std::reverse(results.begin(), results.end());
    const auto csv = consolidated_csv(consolidate_results(results));
    std::reverse(results.begin(), results.end());
    CHECK(csv == consolidated_csv(consolidate_results(results)));
    const auto lines = split(csv, '\n');
    CHECK(lines[0] == opt::design_csv_header());
    CHECK(split(lines[1], ',')[13] == "-");
    CHECK(lines[97] == std::string(kAggregatesMarker));
    CHECK(lines[98] == std::string(kAggregatesHeader));
  }

  TEST_CASE("property: aggregates recompute from the rows") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto table = consolidate_results(sweep_results(1 + seed % 3, 1 + seed, seed));
      std::map<std::string, std::vector<double>> by_key;
      for (const auto& r : table.rows)
        by_key[r.site_id + "," + r.chemistry + "," + format_number(r.duration_h) + "," + format_number(r.rating_mw)]
            .push_back(r.e_star_mwh);
      const auto lines = aggregate_lines(consolidated_csv(table));
      CHECK(lines.size() == by_key.size());
      std::size_t members = 0;
      for (const auto& line : lines) {
        const auto f = split(line, ',');
        const auto& v = by_key.at(f[0] + "," + f[1] + "," + f[2] + "," + f[3]);
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0;
        CHECK(std::stoul(f[4]) == v.size());
        CHECK(std::stod(f[5]) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(std::stod(f[6]) == doctest::Approx(sd).epsilon(1e-12));
        members += v.size();
      }
      CHECK(members == table.rows.size());
    }
  }

  TEST_CASE("plot data round-trips through the svg") {
    const auto table = consolidate_results(sweep_results(2, 10, 5));
    const auto svg = render_design_plot(table, "s2");
    CHECK(extract_plot_data(svg) == plot_data(table, "s2"));
    const auto data = extract_plot_data(svg);
    CHECK(data["panels"].size() == 2);
    CHECK(data["durations_h"] == json::array({2, 4, 6, 8}));
    for (const auto& panel : data["panels"]) CHECK(panel["bars"].size() == 8);
  }

  TEST_CASE("plots have panels, bars, error bars and labels") {
    const auto table = consolidate_results(sweep_results(1, 10, 6));
    const auto svg = render_design_plot(table, "s1");
    auto count = [&](const std::string& pattern) {
      const std::regex re(pattern);
      return std::distance(std::sregex_iterator(svg.begin(), svg.end(), re), std::sregex_iterator());
    };
    CHECK(count("<g class=\"panel\"") == 2);
    CHECK(count("<rect class=\"bar\"") == 16);
    CHECK(count("<g class=\"error-bar\"") == 16);
    CHECK(svg.find("optimal energy E* (MWh)") != std::string::npos);
    CHECK(svg.find("error bars: ±1 sample std over scenario sets") != std::string::npos);
  }

  TEST_CASE("single-result groups draw no error bars and zero bars stay labeled") {
    const auto b = domain::parse_battery_catalog(domain::demo_battery_catalog())[0];
    const auto svg = render_design_plot(consolidate_results({result("s1", b, "t", 0)}), "s1");
    CHECK(svg.find("class=\"error-bar\"") == std::string::npos);
    CHECK(svg.find("height=\"0\"") != std::string::npos);
    CHECK(svg.find("font-size=\"8\">0</text>") != std::string::npos);
  }

  TEST_CASE("unknown sites and missing data blocks are errors") {
    const auto table = consolidate_results(sweep_results(1, 1, 7));
    CHECK_THROWS_AS(render_design_plot(table, "s9"), UnknownSite);
    CHECK_THROWS_AS(extract_plot_data("<svg></svg>"), ParseError);
  }
}
