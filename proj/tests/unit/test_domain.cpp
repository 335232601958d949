#include <doctest.h>

#include <sstream>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"
#include "support/fixtures.hpp"

using namespace cameo;
using namespace cameo::domain;

namespace {

const char* kSites =
    "site_id,name,lon,lat,capacity_mw,interconnect_mw\n"
    "s1,\"North, ridge\",-101.5,35.25,300,250\n"
    "s2,Coast,-97,27.5,150,150\n";

std::string history_rows(const std::string& site, int hours, int skip = -1) {
  std::string out;
  for (int h = 0; h < hours; ++h) {
    if (h == skip) continue;
    out += site + "," + format_iso_utc(1672531200 + h * 3600) + "," + std::to_string(5 + h % 7) + ",30,31,2\n";
  }
  return out;
}

HistoricalRecord parse_text(const std::string& text, const std::string& site) {
  std::istringstream in(text);
  return parse_history(in, "history.csv", site);
}

}  // namespace

TEST_SUITE("domain") {
  TEST_CASE("sites table parses quoted names") {
    std::istringstream in(kSites);
    const auto sites = parse_sites(in, "sites.csv");
    REQUIRE(sites.size() == 2);
    CHECK(sites[0].name == "North, ridge");
    CHECK(sites[0].interconnect_mw == 250);
    std::istringstream again(write_sites_csv(sites));
    CHECK(parse_sites(again, "x") == sites);
  }

  TEST_CASE("out-of-range sites are rejected with their line") {
    std::istringstream in("site_id,name,lon,lat,capacity_mw,interconnect_mw\ns1,a,0,95,1,1\n");
    CHECK_THROWS_WITH_AS(parse_sites(in, "sites.csv"), doctest::Contains("sites.csv:2"), RangeError);
    std::istringstream bad("site_id,name,lon,lat,capacity_mw,interconnect_mw\ns1,a,zero,5,1,1\n");
    try {
      parse_sites(bad, "sites.csv");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 3);
    }
  }

  TEST_CASE("history keeps only the requested site") {
    const auto rec = parse_text("site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh,res_usd_mw\n" +
                                    history_rows("s1", 48) + history_rows("s2", 24),
                                "s1");
    CHECK(rec.hours() == 48);
    CHECK(rec.days() == 2);
    CHECK(rec.start_utc == 1672531200);
    CHECK(rec.res_usd_mw[3] == 2);
  }

  TEST_CASE("a missing hour is a gap naming the timestamp") {
    try {
      parse_text("site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh,res_usd_mw\n" + history_rows("s1", 10, 4), "s1");
      FAIL("expected GapError");
    } catch (const GapError& e) {
      CHECK(e.missing_timestamp() == "2023-01-01T04:00:00Z");
    }
  }

  TEST_CASE("a site without rows is insufficient data") {
    CHECK_THROWS_AS(parse_text("site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh,res_usd_mw\n" +
                                   history_rows("s1", 24),
                               "s9"),
                    InsufficientData);
  }

  TEST_CASE("a reserve price constant substitutes for the column") {
    std::string rows;
    for (int h = 0; h < 24; ++h) rows += "s1," + format_iso_utc(1672531200 + h * 3600) + ",6,20,21\n";
    const auto rec =
        parse_text("# const res_usd_mw=4.5\nsite_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh\n" + rows, "s1");
    CHECK(rec.res_usd_mw == std::vector<double>(24, 4.5));
    CHECK_THROWS_AS(parse_text("site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh\n" + rows, "s1"), ParseError);
  }

  TEST_CASE("demo catalog expands to sixteen configurations") {
    const auto configs = parse_battery_catalog(demo_battery_catalog());
    CHECK(configs.size() == 16);
    for (const auto& b : configs) {
      CHECK_NOTHROW(b.check());
      CHECK(b.rte < 1);
    }
    CHECK(parse_battery_catalog(serialize_battery_catalog(configs)) == configs);
  }

  TEST_CASE("catalog entries are validated") {
    json doc = {{"batteries", json::array({{{"config_id", "x"},
                                            {"chemistry", "c"},
                                            {"duration_h", 4},
                                            {"rating_mw", 10},
                                            {"cost_usd_per_kw", 100},
                                            {"rte", 1.2}}})}};
    CHECK_THROWS_AS(parse_battery_catalog(doc), RangeError);
    doc = demo_battery_catalog();
    doc["rte"].erase("chem_b");
    CHECK_THROWS_AS(parse_battery_catalog(doc), ParseError);
  }

  TEST_CASE("power curve: zero outside the band, cubic inside") {
    const PowerCurve c;
    CHECK(wind_to_power(2.9, c) == 0);
    CHECK(wind_to_power(25, c) == 0);
    CHECK(wind_to_power(12, c) == 1);
    CHECK(wind_to_power(24.9, c) == 1);
    CHECK(wind_to_power(9, c) == doctest::Approx(702.0 / 1701.0));
    double prev = 0;
    for (double v = 3; v < 12; v += 0.25) {
      const double p = wind_to_power(v, c);
      CHECK(p >= prev);
      prev = p;
    }
  }

  TEST_CASE("synthetic history is deterministic and plausible") {
    const auto site = demo_sites()[0];
    const auto a = generate_synthetic_history(site, 42, 30);
    const auto b = generate_synthetic_history(site, 42, 30);
    const auto c = generate_synthetic_history(site, 43, 30);
    CHECK(a == b);
    CHECK(a.wind_ms != c.wind_ms);
    CHECK(a.hours() == 720);
    CHECK(format_iso_utc(a.start_utc) == "2023-01-01T00:00:00Z");
    for (std::size_t h = 0; h < a.hours(); ++h) {
      CHECK(a.wind_ms[h] >= 0);
      CHECK(a.res_usd_mw[h] >= 0);
    }
    CHECK(generate_synthetic_history(demo_sites()[1], 42, 30).wind_ms != a.wind_ms);
  }

  TEST_CASE("history survives a write and reload") {
    testing::TempDir dir;
    const auto sites = demo_sites();
    std::vector<HistoricalRecord> records;
    for (const auto& s : sites) records.push_back(generate_synthetic_history(s, 7, 3));
    write_file_atomic(dir / "history.csv", write_history_csv(records));
    for (const auto& r : records) {
      const auto back = load_history(dir / "history.csv", r.site_id);
      CHECK(back.start_utc == r.start_utc);
      REQUIRE(back.hours() == r.hours());
      for (std::size_t h = 0; h < r.hours(); ++h) CHECK(back.wind_ms[h] == r.wind_ms[h]);
    }
  }

  TEST_CASE("property: slicing into days and reassembling is the identity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto rec = generate_synthetic_history(demo_sites()[seed % 5], seed, 1 + seed % 4);
      const auto days = slice_days(rec, {});
      CHECK(days.size() == rec.days());
      for (const auto& d : days) {
        CHECK(d.wind_factor.size() == 24);
        for (double f : d.wind_factor) CHECK((f >= 0 && f <= 1));
      }
      CHECK(reassemble(rec.site_id, days) == rec);
    }
  }

  TEST_CASE("reassembling non-contiguous days is an invariant error") {
    const auto rec = generate_synthetic_history(demo_sites()[0], 1, 3);
    auto days = slice_days(rec, {});
    days.erase(days.begin() + 1);
    CHECK_THROWS_AS(reassemble(rec.site_id, days), InvariantError);
  }

  TEST_CASE("payload conversion round-trips") {
    const auto site = demo_sites()[2];
    CHECK(json(site).get<WindFarmSite>() == site);
    const auto rec = generate_synthetic_history(site, 5, 2);
    CHECK(json(rec).get<HistoricalRecord>() == rec);
    const auto b = parse_battery_catalog(demo_battery_catalog())[5];
    CHECK(json(b).get<BatteryConfig>() == b);
  }
}
