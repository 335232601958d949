#include <algorithm>
#include <cmath>

#include "cameo/domain.hpp"
#include "cameo/util.hpp"

namespace cameo::domain {

namespace {

constexpr std::int64_t kSyntheticStart = 1672531200;  // 2023-01-01T00:00:00Z

}  // namespace

HistoricalRecord generate_synthetic_history(const WindFarmSite& site, std::uint64_t seed,
                                            std::size_t n_days) {
  Rng rng(derive_seed(seed, site.site_id));

  // Per-site climate, drawn once from the site stream.
  const double mean_wind = 6.5 + 2.5 * rng.uniform();
  const double diurnal_wind = 0.8 + 1.2 * rng.uniform();
  const double base_price = 32.0 + 10.0 * rng.uniform();
  const double evening_peak = 22.0 + 14.0 * rng.uniform();
  const double wind_price_coupling = 0.8 + 0.8 * rng.uniform();

  HistoricalRecord rec;
  rec.site_id = site.site_id;
  rec.start_utc = kSyntheticStart;
  const std::size_t hours = n_days * kHoursPerDay;
  rec.wind_ms.reserve(hours);
  rec.da_usd_mwh.reserve(hours);
  rec.rt_usd_mwh.reserve(hours);
  rec.res_usd_mw.reserve(hours);

  double wind_noise = 0, price_noise = 0, spread = 0;
  for (std::size_t h = 0; h < hours; ++h) {
    const double hod = static_cast<double>(h % kHoursPerDay);
    const double doy = static_cast<double>(h / kHoursPerDay % 365);
    const double season = std::cos(2 * M_PI * doy / 365.0);  // +1 in winter

    wind_noise = 0.88 * wind_noise + 1.1 * rng.normal();
    double wind = mean_wind + 0.9 * season + diurnal_wind * std::cos(2 * M_PI * (hod - 2) / 24) +
                  wind_noise;
    wind = std::max(0.0, wind);

    price_noise = 0.7 * price_noise + 2.5 * rng.normal();
    const double evening = std::exp(-(hod - 19) * (hod - 19) / 6.0);
    const double morning = std::exp(-(hod - 8) * (hod - 8) / 4.0);
    const double midday_dip = std::exp(-(hod - 13) * (hod - 13) / 8.0);
    double da = base_price + 6 * season + evening_peak * evening + 7 * morning - 9 * midday_dip -
                wind_price_coupling * (wind - mean_wind) + price_noise;
    da = std::max(1.0, da);

    spread = 0.6 * spread + 5.0 * rng.normal();
    double rt = std::max(0.0, da + spread);

    double res = 0.6 + 2.0 * evening + 0.3 * std::abs(rng.normal());

    rec.wind_ms.push_back(wind);
    rec.da_usd_mwh.push_back(da);
    rec.rt_usd_mwh.push_back(rt);
    rec.res_usd_mw.push_back(res);
  }
  return rec;
}

std::vector<WindFarmSite> demo_sites() {
  // Illustrative coordinates along the California coast; capacities are placeholders.
  return {
      {"s1", "Coastal North", -124.2, 41.8, 400, 350},
      {"s2", "Tehachapi Pass", -118.4, 35.1, 600, 500},
      {"s3", "Altamont Ridge", -121.6, 37.7, 300, 300},
      {"s4", "Humboldt Offshore", -124.6, 40.9, 800, 650},
      {"s5", "Morro Bay Offshore", -121.2, 35.4, 1000, 900},
  };
}

json demo_battery_catalog() {
  // Chemistry labels and cost/RTE numbers are illustrative placeholders.
  return json{
      {"comment", "illustrative demo catalog; not vendor data"},
      {"chemistries", {"chem_a", "chem_b"}},
      {"durations_h", {2, 4, 6, 8}},
      {"ratings_mw", {100, 1000}},
      {"cost_usd_per_kw",
       {{"chem_a", {{"2", 350}, {"4", 620}, {"6", 900}, {"8", 1180}}},
        {"chem_b", {{"2", 520}, {"4", 900}, {"6", 1300}, {"8", 1700}}}}},
      {"rte", {{"chem_a", 0.86}, {"chem_b", 0.92}}},
  };
}

}  // namespace cameo::domain
