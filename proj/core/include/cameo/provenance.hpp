#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cameo/util.hpp"

namespace cameo {

inline constexpr std::string_view kTraceHeader =
    "task_id\tprocess\ttag\tstatus\tattempt\tsubmit_ms\tstart_ms\tcomplete_ms\tduration_ms\tcpu_fraction\t"
    "peak_rss_bytes\tcache_hit";

struct TraceRecord {
  std::string task_id;
  std::string process;
  std::string tag;
  std::string status;  // Succeeded | Failed | FailedPermanent | Cached
  int attempt = 1;
  std::int64_t submit_ms = 0;
  std::int64_t start_ms = 0;
  std::int64_t complete_ms = 0;
  std::int64_t duration_ms = 0;
  std::optional<double> cpu_fraction;
  std::optional<std::uint64_t> peak_rss_bytes;
  bool cache_hit = false;
  std::string workdir;  // not part of the trace line

  bool operator==(const TraceRecord&) const = default;
};

/// Twelve tab-separated fields, absent metrics as `-`, no trailing newline.
std::string format_trace_line(const TraceRecord& r);
TraceRecord parse_trace_line(std::string_view line, std::size_t line_number, const std::string& source);

/// Creates the file with its header line when it does not exist yet.
void init_trace(const fs::path& file);

/// Appends one line with a single O_APPEND write. InvariantError unless
/// submit <= start <= complete and duration = complete - start; IoError on disk errors.
void append_trace(const TraceRecord& record, const fs::path& file);

/// Every record; ParseError names the offending line. A trailing line without newline
/// (an interrupted append) is ignored.
std::vector<TraceRecord> read_trace(const fs::path& file);

enum class Metric { Duration, Cpu, Memory };
inline constexpr std::array<Metric, 3> kMetrics = {Metric::Duration, Metric::Cpu, Metric::Memory};
const char* to_string(Metric m);

struct MetricStats {
  std::size_t n = 0;  // present samples; 0 means the metric is absent
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, std = 0;
  std::vector<double> samples;  // in trace order

  bool present() const { return n > 0; }
};

struct ProcessStats {
  std::string process;
  std::size_t count = 0;   // non-cached trace lines
  std::size_t cached = 0;  // cached trace lines, counted separately
  std::array<MetricStats, 3> metrics;  // indexed like kMetrics

  const MetricStats& metric(Metric m) const { return metrics[static_cast<std::size_t>(m)]; }
};

/// Type-7 quantile (linear interpolation between order statistics) of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p);
MetricStats summarize_samples(std::vector<double> samples);

/// One entry per process in order of first appearance. Duration is in ms, CPU a fraction
/// of one core, memory in bytes.
std::vector<ProcessStats> aggregate_stats(const std::vector<TraceRecord>& records);
std::vector<ProcessStats> aggregate_stats(const fs::path& trace_file);

inline constexpr std::string_view kStatsHeader = "process,count,metric,min,q1,median,q3,max,mean,std";

/// One row per (process, metric); absent metrics have `-` in every value column.
std::string stats_csv(const std::vector<ProcessStats>& stats);
/// Self-contained page: a table per process whose cells carry data-process/metric/field
/// attributes and the same number strings as the CSV, plus inline SVG box plots.
std::string stats_html(const std::vector<ProcessStats>& stats, const std::string& title);

struct ReportFiles {
  fs::path csv;
  fs::path html;
};

/// Reads `<run_dir>/trace.tsv` and writes `<run_dir>/report/{stats.csv,report.html}`.
ReportFiles render_provenance_report(const fs::path& run_dir);

}  // namespace cameo
