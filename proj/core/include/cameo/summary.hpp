#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cameo/optimizer.hpp"

namespace cameo::report {

struct GroupKey {
  std::string site_id;
  std::string chemistry;
  double duration_h = 0;
  double rating_mw = 0;

  auto operator<=>(const GroupKey&) const = default;
};

struct GroupAggregate {
  GroupKey key;
  std::size_t n = 0;
  double mean_e_mwh = 0;
  double std_e_mwh = 0;  // sample std, 0 when n = 1
};

struct SummaryTable {
  std::vector<opt::DesignResult> rows;  // sorted by group key, then stochastic id
  std::vector<GroupAggregate> groups;   // sorted by key

  std::vector<std::string> sites() const;
};

/// EmptyInput when `results` is empty.
SummaryTable consolidate_results(std::vector<opt::DesignResult> results);

inline constexpr std::string_view kAggregatesMarker = "# aggregates";
inline constexpr std::string_view kAggregatesHeader =
    "site_id,chemistry,duration_h,rating_mw,n,mean_e_star_mwh,std_e_star_mwh";

/// Header, one row per result (solve time as `-`, it differs between runs), then the
/// aggregates section.
std::string consolidated_csv(const SummaryTable& table);

/// Grouped bar chart of mean E* per (duration, rating), one panel per chemistry, with
/// ±1 std error bars when a group has more than one result. The SVG carries its values
/// as JSON in `<metadata id="plot-data">`. UnknownSite when the table lacks the site.
std::string render_design_plot(const SummaryTable& table, const std::string& site_id);

/// The values a plot of `site_id` shows.
json plot_data(const SummaryTable& table, const std::string& site_id);

/// Reads the data block back from a rendered plot; ParseError when it is missing.
json extract_plot_data(std::string_view svg);

}  // namespace cameo::report
