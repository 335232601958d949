#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cameo/errors.hpp"
#include "cameo/summary.hpp"

namespace cameo::report {

namespace {

constexpr std::string_view kDataOpen = "<metadata id=\"plot-data\"><![CDATA[";
constexpr std::string_view kDataClose = "]]></metadata>";
constexpr const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52"};

std::string px(double v) { return format_number(std::round(v * 10) / 10); }

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `v`.
double nice_ceiling(double v) {
  if (v <= 0) return 1;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= v * (1 - 1e-12)) return m * p;
  return 10 * p;
}

}  // namespace

json plot_data(const SummaryTable& table, const std::string& site_id) {
  std::set<std::string> chemistries;
  std::set<double> durations, ratings;
  for (const auto& g : table.groups)
    if (g.key.site_id == site_id) {
      chemistries.insert(g.key.chemistry);
      durations.insert(g.key.duration_h);
      ratings.insert(g.key.rating_mw);
    }
  if (chemistries.empty()) throw UnknownSite("no design results for site '" + site_id + "'");
  json panels = json::array();
  for (const auto& chem : chemistries) {
    json bars = json::array();
    for (double d : durations)
      for (double rating : ratings) {
        auto it = std::find_if(table.groups.begin(), table.groups.end(), [&](const GroupAggregate& g) {
          return g.key.site_id == site_id && g.key.chemistry == chem && g.key.duration_h == d &&
                 g.key.rating_mw == rating;
        });
        if (it == table.groups.end()) continue;
        bars.push_back({{"duration_h", d},
                        {"rating_mw", rating},
                        {"n", it->n},
                        {"mean_e_star_mwh", it->mean_e_mwh},
                        {"std_e_star_mwh", it->std_e_mwh},
                        {"error_bar", it->n > 1}});
      }
    panels.push_back({{"chemistry", chem}, {"bars", bars}});
  }
  return {{"site_id", site_id},
          {"durations_h", json(std::vector<double>(durations.begin(), durations.end()))},
          {"ratings_mw", json(std::vector<double>(ratings.begin(), ratings.end()))},
          {"panels", panels}};
}

std::string render_design_plot(const SummaryTable& table, const std::string& site_id) {
  const json data = plot_data(table, site_id);
  const auto durations = data["durations_h"].get<std::vector<double>>();
  const auto ratings = data["ratings_mw"].get<std::vector<double>>();
  const std::size_t n_panels = data["panels"].size();

  double top = 0;
  for (const auto& panel : data["panels"])
    for (const auto& b : panel["bars"]) {
      double v = b["mean_e_star_mwh"].get<double>();
      if (b["error_bar"].get<bool>()) v += b["std_e_star_mwh"].get<double>();
      top = std::max(top, v);
    }
  top = nice_ceiling(top);

  constexpr double kPanelW = 420, kPanelH = 300, kLeft = 70, kRight = 15, kTop = 40, kBottom = 50;
  constexpr double kLegendH = 40, kTitleH = 30;
  const double width = kPanelW * static_cast<double>(n_panels);
  const double height = kTitleH + kPanelH + kLegendH;
  const double plot_w = kPanelW - kLeft - kRight, plot_h = kPanelH - kTop - kBottom;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
      << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\" font-family=\"sans-serif\">\n";
  svg << kDataOpen << data.dump() << kDataClose << "\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << px(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">Optimal battery size, site "
      << escape(site_id) << "</text>\n";

  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, durations.size()));
  const double bar_w = group_w * 0.7 / static_cast<double>(std::max<std::size_t>(1, ratings.size()));
  for (std::size_t p = 0; p < n_panels; ++p) {
    const json& panel = data["panels"][p];
    const double ox = kPanelW * static_cast<double>(p) + kLeft, oy = kTitleH + kTop;
    auto y_of = [&](double v) { return oy + plot_h - v / top * plot_h; };
    svg << "<g class=\"panel\" data-chemistry=\"" << escape(panel["chemistry"].get<std::string>()) << "\">\n";
    svg << "<text x=\"" << px(ox + plot_w / 2) << "\" y=\"" << px(oy - 12) << "\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(panel["chemistry"].get<std::string>()) << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double v = top * k / 4;
      svg << "<line x1=\"" << px(ox) << "\" y1=\"" << px(y_of(v)) << "\" x2=\"" << px(ox + plot_w) << "\" y2=\""
          << px(y_of(v)) << "\" stroke=\"#e5e5e5\"/>";
      svg << "<text x=\"" << px(ox - 6) << "\" y=\"" << px(y_of(v) + 4) << "\" text-anchor=\"end\" font-size=\"10\">"
          << format_number(v) << "</text>\n";
    }
    svg << "<line x1=\"" << px(ox) << "\" y1=\"" << px(oy) << "\" x2=\"" << px(ox) << "\" y2=\"" << px(oy + plot_h)
        << "\" stroke=\"#333\"/><line x1=\"" << px(ox) << "\" y1=\"" << px(oy + plot_h) << "\" x2=\"" << px(ox + plot_w)
        << "\" y2=\"" << px(oy + plot_h) << "\" stroke=\"#333\"/>\n";
    svg << "<text transform=\"translate(" << px(ox - 50) << ',' << px(oy + plot_h / 2)
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">optimal energy E* (MWh)</text>\n";
    for (std::size_t d = 0; d < durations.size(); ++d) {
      const double gx = ox + group_w * static_cast<double>(d);
      svg << "<text x=\"" << px(gx + group_w / 2) << "\" y=\"" << px(oy + plot_h + 16)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << format_number(durations[d]) << " h</text>\n";
    }
    svg << "<text x=\"" << px(ox + plot_w / 2) << "\" y=\"" << px(oy + plot_h + 36)
        << "\" text-anchor=\"middle\" font-size=\"11\">battery duration</text>\n";
    for (const auto& b : panel["bars"]) {
      const double d = b["duration_h"].get<double>(), rating = b["rating_mw"].get<double>();
      const auto di = static_cast<double>(std::find(durations.begin(), durations.end(), d) - durations.begin());
      const auto ri = static_cast<std::size_t>(std::find(ratings.begin(), ratings.end(), rating) - ratings.begin());
      const double mean = b["mean_e_star_mwh"].get<double>();
      const double x = ox + group_w * di + group_w * 0.15 + bar_w * static_cast<double>(ri);
      svg << "<rect class=\"bar\" x=\"" << px(x) << "\" y=\"" << px(y_of(mean)) << "\" width=\"" << px(bar_w)
          << "\" height=\"" << px(plot_h * mean / top) << "\" fill=\"" << kColors[ri % 4] << "\"/>";
      svg << "<text x=\"" << px(x + bar_w / 2) << "\" y=\"" << px(y_of(mean) - 3)
          << "\" text-anchor=\"middle\" font-size=\"8\">" << format_number(std::round(mean * 10) / 10) << "</text>";
      if (b["error_bar"].get<bool>()) {
        const double s = b["std_e_star_mwh"].get<double>();
        const double cx = x + bar_w / 2, lo = y_of(std::max(0.0, mean - s)), hi = y_of(mean + s);
        svg << "<g class=\"error-bar\" stroke=\"#111\"><line x1=\"" << px(cx) << "\" y1=\"" << px(lo) << "\" x2=\""
            << px(cx) << "\" y2=\"" << px(hi) << "\"/><line x1=\"" << px(cx - 4) << "\" y1=\"" << px(hi) << "\" x2=\""
            << px(cx + 4) << "\" y2=\"" << px(hi) << "\"/><line x1=\"" << px(cx - 4) << "\" y1=\"" << px(lo)
            << "\" x2=\"" << px(cx + 4) << "\" y2=\"" << px(lo) << "\"/></g>";
      }
      svg << "\n";
    }
    svg << "</g>\n";
  }

  const double ly = kTitleH + kPanelH + 14;
  double lx = kLeft;
  for (std::size_t r = 0; r < ratings.size(); ++r) {
    svg << "<rect x=\"" << px(lx) << "\" y=\"" << px(ly - 9) << "\" width=\"12\" height=\"12\" fill=\"" << kColors[r % 4]
        << "\"/><text x=\"" << px(lx + 16) << "\" y=\"" << px(ly + 1) << "\" font-size=\"11\">rating "
        << format_number(ratings[r]) << " MW</text>\n";
    lx += 130;
  }
  svg << "<text x=\"" << px(lx) << "\" y=\"" << px(ly + 1)
      << "\" font-size=\"11\">error bars: ±1 sample std over scenario sets</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

json extract_plot_data(std::string_view svg) {
  const auto open = svg.find(kDataOpen);
  if (open == std::string_view::npos) throw ParseError("plot", 0, 0, "no plot-data block");
  const auto begin = open + kDataOpen.size();
  const auto close = svg.find(kDataClose, begin);
  if (close == std::string_view::npos) throw ParseError("plot", 0, 0, "unterminated plot-data block");
  try {
    return json::parse(svg.substr(begin, close - begin));
  } catch (const json::exception& e) {
    throw ParseError("plot", 0, 0, std::string("plot-data block is not valid: ") + e.what());
  }
}

}  // namespace cameo::report
