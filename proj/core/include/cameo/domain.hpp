#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "cameo/digest.hpp"

namespace cameo::domain {

namespace fs = std::filesystem;

struct WindFarmSite {
  std::string site_id;
  std::string name;
  double lon = 0;  // degrees
  double lat = 0;  // degrees
  double capacity_mw = 0;
  double interconnect_mw = 0;

  void check() const;  // RangeError
  bool operator==(const WindFarmSite&) const = default;
};

/// Contiguous hourly series for one site. Timestamps are implied: start + i hours.
struct HistoricalRecord {
  std::string site_id;
  std::int64_t start_utc = 0;  // seconds since epoch
  std::vector<double> wind_ms;
  std::vector<double> da_usd_mwh;
  std::vector<double> rt_usd_mwh;
  std::vector<double> res_usd_mw;

  std::size_t hours() const { return wind_ms.size(); }
  std::size_t days() const { return wind_ms.size() / 24; }
  std::int64_t timestamp(std::size_t hour) const {
    return start_utc + static_cast<std::int64_t>(hour) * 3600;
  }
  void check() const;  // InvariantError
  bool operator==(const HistoricalRecord&) const = default;
};

struct BatteryConfig {
  std::string config_id;
  std::string chemistry;
  double duration_h = 0;
  double rating_mw = 0;
  double cost_usd_per_kw = 0;
  double rte = 1;

  void check() const;  // RangeError
  bool operator==(const BatteryConfig&) const = default;
};

/// Idealized turbine curve; defaults are a generic utility-scale turbine.
struct PowerCurve {
  double cut_in_ms = 3;
  double rated_ms = 12;
  double cut_out_ms = 25;

  void check() const;
  bool operator==(const PowerCurve&) const = default;
};

inline constexpr std::size_t kHoursPerDay = 24;

struct DayProfile {
  std::string date;               // YYYY-MM-DD of the first hour
  std::int64_t start_utc = 0;
  std::vector<double> wind_ms;      // raw speed, kept so slicing is invertible
  std::vector<double> wind_factor;  // power factor in [0, 1]
  std::vector<double> da;
  std::vector<double> rt;
  std::vector<double> res;

  bool operator==(const DayProfile&) const = default;
};

// ---- loaders --------------------------------------------------------------

/// sites.csv: `site_id,name,lon,lat,capacity_mw,interconnect_mw`.
std::vector<WindFarmSite> load_sites(const fs::path& file);
std::vector<WindFarmSite> parse_sites(std::istream& in, const std::string& source);
std::string write_sites_csv(const std::vector<WindFarmSite>& sites);

/// history.csv: `site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh,res_usd_mw`.
/// A file without the reserve column must declare `# const res_usd_mw=<value>` before the
/// header row. Rows of other sites are ignored.
HistoricalRecord load_history(const fs::path& file, const std::string& site_id);
HistoricalRecord parse_history(std::istream& in, const std::string& source,
                               const std::string& site_id);
std::string write_history_csv(const std::vector<HistoricalRecord>& records);

/// batteries.json in factored form (`chemistries`, `durations_h`, `ratings_mw`,
/// `cost_usd_per_kw`, `rte`) or explicit form (`batteries: [...]`).
std::vector<BatteryConfig> load_battery_catalog(const fs::path& file);
std::vector<BatteryConfig> parse_battery_catalog(const json& doc);
json serialize_battery_catalog(const std::vector<BatteryConfig>& configs);

// ---- conversions ----------------------------------------------------------

double wind_to_power(double speed_ms, const PowerCurve& curve);

/// Cuts a record into whole days; a trailing partial day is an InvariantError.
std::vector<DayProfile> slice_days(const HistoricalRecord& record, const PowerCurve& curve);
HistoricalRecord reassemble(const std::string& site_id, const std::vector<DayProfile>& days);

/// Seeded synthetic history starting 2023-01-01T00:00Z. Deterministic in (site_id, seed, n_days).
HistoricalRecord generate_synthetic_history(const WindFarmSite& site, std::uint64_t seed,
                                            std::size_t n_days);

/// The five illustrative sites and sixteen-entry factored catalog used by the demos.
std::vector<WindFarmSite> demo_sites();
json demo_battery_catalog();

// ---- payload conversion ---------------------------------------------------

void to_json(json& j, const WindFarmSite& s);
void from_json(const json& j, WindFarmSite& s);
void to_json(json& j, const HistoricalRecord& r);
void from_json(const json& j, HistoricalRecord& r);
void to_json(json& j, const BatteryConfig& b);
void from_json(const json& j, BatteryConfig& b);
void to_json(json& j, const PowerCurve& c);
void from_json(const json& j, PowerCurve& c);
void to_json(json& j, const DayProfile& d);
void from_json(const json& j, DayProfile& d);

}  // namespace cameo::domain
