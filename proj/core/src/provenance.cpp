#include "cameo/provenance.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

#include "cameo/errors.hpp"

namespace cameo {

// ---- trace file -----------------------------------------------------------

namespace {

std::string clean_field(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return s.empty() ? "-" : s;
}

void check_record(const TraceRecord& r) {
  if (r.start_ms < r.submit_ms || r.complete_ms < r.start_ms)
    throw InvariantError("trace record " + r.task_id + ": timestamps must satisfy submit <= start <= complete");
  if (r.duration_ms != r.complete_ms - r.start_ms)
    throw InvariantError("trace record " + r.task_id + ": duration must equal complete - start");
  if (r.attempt < 1) throw InvariantError("trace record " + r.task_id + ": attempt must be >= 1");
}

void write_all(int fd, const std::string& data, const fs::path& file) {
  const ssize_t n = ::write(fd, data.data(), data.size());
  if (n != static_cast<ssize_t>(data.size()))
    throw IoError("cannot append to " + file.string() + ": " + (n < 0 ? std::strerror(errno) : "short write"));
}

}  // namespace

std::string format_trace_line(const TraceRecord& r) {
  std::string out;
  out += clean_field(r.task_id) + '\t' + clean_field(r.process) + '\t' + clean_field(r.tag) + '\t';
  out += clean_field(r.status) + '\t' + std::to_string(r.attempt) + '\t';
  out += std::to_string(r.submit_ms) + '\t' + std::to_string(r.start_ms) + '\t' + std::to_string(r.complete_ms) + '\t';
  out += std::to_string(r.duration_ms) + '\t';
  out += (r.cpu_fraction ? format_number(*r.cpu_fraction) : "-") + '\t';
  out += (r.peak_rss_bytes ? std::to_string(*r.peak_rss_bytes) : "-") + '\t';
  out += r.cache_hit ? "true" : "false";
  return out;
}

TraceRecord parse_trace_line(std::string_view line, std::size_t line_number, const std::string& source) {
  const auto fields = split(line, '\t');
  auto fail = [&](const std::string& what) -> ParseError { return ParseError(source, line_number, 0, what); };
  if (fields.size() != 12) throw fail("expected 12 tab-separated fields, found " + std::to_string(fields.size()));
  auto integer = [&](std::size_t i) {
    auto v = parse_integer(fields[i]);
    if (!v) throw fail("field " + std::to_string(i + 1) + " is not an integer: '" + fields[i] + "'");
    return *v;
  };
  TraceRecord r;
  r.task_id = fields[0];
  r.process = fields[1];
  r.tag = fields[2] == "-" ? "" : fields[2];
  r.status = fields[3];
  r.attempt = static_cast<int>(integer(4));
  r.submit_ms = integer(5);
  r.start_ms = integer(6);
  r.complete_ms = integer(7);
  r.duration_ms = integer(8);
  if (fields[9] != "-") {
    auto v = parse_number(fields[9]);
    if (!v) throw fail("cpu_fraction is not a number: '" + fields[9] + "'");
    r.cpu_fraction = *v;
  }
  if (fields[10] != "-") {
    auto v = parse_integer(fields[10]);
    if (!v || *v < 0) throw fail("peak_rss_bytes is not a byte count: '" + fields[10] + "'");
    r.peak_rss_bytes = static_cast<std::uint64_t>(*v);
  }
  if (fields[11] != "true" && fields[11] != "false") throw fail("cache_hit must be true or false");
  r.cache_hit = fields[11] == "true";
  return r;
}

void init_trace(const fs::path& file) {
  std::error_code ec;
  if (fs::exists(file, ec)) return;
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  const int fd = ::open(file.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_APPEND, 0644);
  if (fd < 0) {
    if (errno == EEXIST) return;
    throw IoError("cannot create " + file.string() + ": " + std::strerror(errno));
  }
  try {
    write_all(fd, std::string(kTraceHeader) + "\n", file);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

void append_trace(const TraceRecord& record, const fs::path& file) {
  check_record(record);
  init_trace(file);
  const int fd = ::open(file.c_str(), O_WRONLY | O_APPEND);
  if (fd < 0) throw IoError("cannot open " + file.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, format_trace_line(record) + "\n", file);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

std::vector<TraceRecord> read_trace(const fs::path& file) {
  const std::string text = read_file(file);
  std::vector<TraceRecord> out;
  std::size_t pos = 0, line_number = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final append
    ++line_number;
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line_number == 1) {
      if (line != kTraceHeader) throw ParseError(file.string(), 1, 0, "unexpected trace header");
      continue;
    }
    if (line.empty()) continue;
    out.push_back(parse_trace_line(line, line_number, file.string()));
  }
  if (line_number == 0) throw ParseError(file.string(), 1, 0, "missing trace header");
  return out;
}

// ---- statistics -----------------------------------------------------------

const char* to_string(Metric m) {
  switch (m) {
    case Metric::Duration:
      return "duration";
    case Metric::Cpu:
      return "cpu";
    case Metric::Memory:
      return "memory";
  }
  return "?";
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricStats summarize_samples(std::vector<double> samples) {
  MetricStats s;
  s.n = samples.size();
  s.samples = samples;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.min = samples.front();
  s.max = samples.back();
  s.q1 = quantile_sorted(samples, 0.25);
  s.median = quantile_sorted(samples, 0.5);
  s.q3 = quantile_sorted(samples, 0.75);
  s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : s.samples) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::vector<ProcessStats> aggregate_stats(const std::vector<TraceRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, 3>> samples;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : records) {
    if (!counts.count(r.process)) order.push_back(r.process);
    auto& c = counts[r.process];
    auto& s = samples[r.process];
    if (r.cache_hit) {
      ++c.second;
      continue;
    }
    ++c.first;
    s[0].push_back(static_cast<double>(r.duration_ms));
    if (r.cpu_fraction) s[1].push_back(*r.cpu_fraction);
    if (r.peak_rss_bytes) s[2].push_back(static_cast<double>(*r.peak_rss_bytes));
  }
  std::vector<ProcessStats> out;
  for (const auto& name : order) {
    ProcessStats p;
    p.process = name;
    p.count = counts[name].first;
    p.cached = counts[name].second;
    for (std::size_t m = 0; m < 3; ++m) p.metrics[m] = summarize_samples(samples[name][m]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ProcessStats> aggregate_stats(const fs::path& trace_file) { return aggregate_stats(read_trace(trace_file)); }

namespace {

constexpr const char* kFields[] = {"min", "q1", "median", "q3", "max", "mean", "std"};

std::array<std::string, 7> field_strings(const MetricStats& m) {
  if (!m.present()) return {"-", "-", "-", "-", "-", "-", "-"};
  return {format_number(m.min), format_number(m.q1),   format_number(m.median), format_number(m.q3),
          format_number(m.max), format_number(m.mean), format_number(m.std)};
}

std::string escape_html(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* metric_unit(Metric m) {
  switch (m) {
    case Metric::Duration: return "ms";
    case Metric::Cpu: return "fraction of one core";
    case Metric::Memory: return "bytes";
  }
  return "";
}

std::string box_plot_svg(const MetricStats& m, Metric metric) {
  std::ostringstream svg;
  constexpr int kW = 260, kH = 150, kLeft = 20, kRight = 240;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" role=\"img\">";
  svg << "<text x=\"" << kW / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"12\">" << to_string(metric) << " ("
      << metric_unit(metric) << ")</text>";
  if (!m.present()) {
    svg << "<rect x=\"" << kLeft << "\" y=\"40\" width=\"" << kRight - kLeft
        << "\" height=\"60\" fill=\"#f4f4f4\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>";
    svg << "<text x=\"" << kW / 2 << "\" y=\"75\" text-anchor=\"middle\" font-size=\"12\" fill=\"#666\">"
        << "metric unavailable</text></svg>";
    return svg.str();
  }
  const double span = m.max - m.min;
  auto x = [&](double v) {
    return span > 0 ? kLeft + (v - m.min) / span * (kRight - kLeft) : (kLeft + kRight) / 2.0;
  };
  auto num = [](double v) { return format_number(std::round(v * 100) / 100); };
  const int y0 = 50, y1 = 100, ym = 75;
  svg << "<line x1=\"" << num(x(m.min)) << "\" y1=\"" << ym << "\" x2=\"" << num(x(m.q1)) << "\" y2=\"" << ym
      << "\" stroke=\"#333\"/>";
  svg << "<line x1=\"" << num(x(m.q3)) << "\" y1=\"" << ym << "\" x2=\"" << num(x(m.max)) << "\" y2=\"" << ym
      << "\" stroke=\"#333\"/>";
  for (double v : {m.min, m.max})
    svg << "<line x1=\"" << num(x(v)) << "\" y1=\"" << y0 + 10 << "\" x2=\"" << num(x(v)) << "\" y2=\"" << y1 - 10
        << "\" stroke=\"#333\"/>";
  svg << "<rect x=\"" << num(x(m.q1)) << "\" y=\"" << y0 << "\" width=\"" << num(std::max(1.0, x(m.q3) - x(m.q1)))
      << "\" height=\"" << y1 - y0 << "\" fill=\"#9ecae1\" stroke=\"#333\"/>";
  svg << "<line x1=\"" << num(x(m.median)) << "\" y1=\"" << y0 << "\" x2=\"" << num(x(m.median)) << "\" y2=\"" << y1
      << "\" stroke=\"#08519c\" stroke-width=\"2\"/>";
  svg << "<circle cx=\"" << num(x(m.mean)) << "\" cy=\"" << ym << "\" r=\"3\" fill=\"#d62728\"/>";
  svg << "<text x=\"" << kLeft << "\" y=\"125\" font-size=\"10\">" << escape_html(format_number(m.min)) << "</text>";
  svg << "<text x=\"" << kRight << "\" y=\"125\" font-size=\"10\" text-anchor=\"end\">"
      << escape_html(format_number(m.max)) << "</text>";
  svg << "<text x=\"" << kW / 2 << "\" y=\"142\" font-size=\"10\" text-anchor=\"middle\">n = " << m.n << "</text>";
  svg << "</svg>";
  return svg.str();
}

}  // namespace

std::string stats_csv(const std::vector<ProcessStats>& stats) {
  std::string out(kStatsHeader);
  out += '\n';
  for (const auto& p : stats)
    for (auto metric : kMetrics) {
      out += csv_field(p.process) + ',' + std::to_string(p.count) + ',' + to_string(metric);
      for (const auto& f : field_strings(p.metric(metric))) out += ',' + f;
      out += '\n';
    }
  return out;
}

std::string stats_html(const std::vector<ProcessStats>& stats, const std::string& title) {
  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << escape_html(title)
    << "</title>\n<style>\nbody{font-family:sans-serif;margin:2em;color:#222}\n"
       "table{border-collapse:collapse;margin:0.5em 0}\ntd,th{border:1px solid #ccc;padding:2px 8px;"
       "text-align:right}\nth:first-child,td:first-child{text-align:left}\n.panels{display:flex;gap:1em}\n"
       "</style>\n</head>\n<body>\n<h1>"
    << escape_html(title) << "</h1>\n";
  h << "<p>Cached tasks are counted separately and excluded from the statistics.</p>\n";
  for (const auto& p : stats) {
    const std::string proc = escape_html(p.process);
    h << "<section class=\"process\" data-process=\"" << proc << "\">\n<h2>" << proc << "</h2>\n";
    h << "<p>tasks: <span data-process=\"" << proc << "\" data-field=\"count\">" << p.count
      << "</span>, cached: <span data-process=\"" << proc << "\" data-field=\"cached\">" << p.cached << "</span></p>\n";
    h << "<table>\n<tr><th>metric</th>";
    for (const char* f : kFields) h << "<th>" << f << "</th>";
    h << "</tr>\n";
    for (auto metric : kMetrics) {
      h << "<tr><td>" << to_string(metric) << "</td>";
      const auto values = field_strings(p.metric(metric));
      for (std::size_t i = 0; i < values.size(); ++i)
        h << "<td data-process=\"" << proc << "\" data-metric=\"" << to_string(metric) << "\" data-field=\""
          << kFields[i] << "\">" << values[i] << "</td>";
      h << "</tr>\n";
    }
    h << "</table>\n<div class=\"panels\">\n";
    for (auto metric : kMetrics)
      h << "<figure class=\"panel\" data-metric=\"" << to_string(metric) << "\">" << box_plot_svg(p.metric(metric), metric)
        << "</figure>\n";
    h << "</div>\n</section>\n";
  }
  h << "</body>\n</html>\n";
  return h.str();
}

ReportFiles render_provenance_report(const fs::path& run_dir) {
  const auto stats = aggregate_stats(run_dir / "trace.tsv");
  if (stats.empty()) throw EmptyInput("trace in " + run_dir.string() + " has no records");
  ReportFiles files{run_dir / "report" / "stats.csv", run_dir / "report" / "report.html"};
  fs::create_directories(files.csv.parent_path());
  write_file_atomic(files.csv, stats_csv(stats));
  write_file_atomic(files.html, stats_html(stats, "Provenance report: " + run_dir.filename().string()));
  return files;
}

}  // namespace cameo
