#include <doctest.h>

#include <map>
#include <regex>

#include "cameo/errors.hpp"
#include "cameo/provenance.hpp"
#include "support/fixtures.hpp"

using namespace cameo;
using cameo::testing::TempDir;

namespace {

TraceRecord record(const std::string& process, std::int64_t duration, std::optional<double> cpu = {},
                   std::optional<std::uint64_t> rss = {}, const std::string& status = "Succeeded") {
  static int n = 0;
  TraceRecord r;
  r.task_id = process + "-" + std::to_string(n++);
  r.process = process;
  r.tag = "t";
  r.status = status;
  r.submit_ms = 1000;
  r.start_ms = 1000;
  r.complete_ms = 1000 + duration;
  r.duration_ms = duration;
  r.cpu_fraction = cpu;
  r.peak_rss_bytes = rss;
  r.cache_hit = status == "Cached";
  return r;
}

TraceRecord random_record(Rng& rng) {
  TraceRecord r = record(rng.uniform() < 0.5 ? "alpha" : "beta", static_cast<std::int64_t>(rng.below(5000)));
  r.tag = rng.uniform() < 0.2 ? "" : "s" + std::to_string(rng.below(9));
  r.attempt = 1 + static_cast<int>(rng.below(3));
  r.submit_ms = static_cast<std::int64_t>(rng.below(1000));
  r.start_ms = r.submit_ms + static_cast<std::int64_t>(rng.below(100));
  r.complete_ms = r.start_ms + r.duration_ms;
  if (rng.uniform() < 0.7) r.cpu_fraction = rng.uniform();
  if (rng.uniform() < 0.7) r.peak_rss_bytes = rng.below(1u << 30);
  const char* statuses[] = {"Succeeded", "Failed", "FailedPermanent", "Cached"};
  r.status = statuses[rng.below(4)];
  r.cache_hit = r.status == "Cached";
  return r;
}

}  // namespace

TEST_SUITE("provenance") {
  TEST_CASE("trace lines round-trip with absent metrics as dashes") {
    auto r = record("design_ss", 250, 0.5, std::nullopt);
    const auto line = format_trace_line(r);
    CHECK(split(line, '\t').size() == 12);
    CHECK(split(line, '\t')[10] == "-");
    CHECK(parse_trace_line(line, 2, "t") == r);
  }

  TEST_CASE("property: every record round-trips through a trace file") {
    TempDir dir;
    const auto file = dir / "trace.tsv";
    Rng rng(21);
    std::vector<TraceRecord> written;
    for (int i = 0; i < 300; ++i) {
      written.push_back(random_record(rng));
      append_trace(written.back(), file);
    }
    CHECK(read_trace(file) == written);
  }

  TEST_CASE("inconsistent timing is rejected") {
    TempDir dir;
    auto r = record("p", 10);
    r.duration_ms = 11;
    CHECK_THROWS_AS(append_trace(r, dir / "trace.tsv"), InvariantError);
    r = record("p", 10);
    r.start_ms = r.submit_ms - 1;
    CHECK_THROWS_AS(append_trace(r, dir / "trace.tsv"), InvariantError);
  }

  TEST_CASE("malformed lines name their line number") {
    TempDir dir;
    const auto file = dir / "trace.tsv";
    append_trace(record("p", 1), file);
    append_trace(record("p", 2), file);
    write_file_atomic(file, read_file(file) + "broken\tline\n");
    try {
      read_trace(file);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }

  TEST_CASE("a torn final append is ignored") {
    TempDir dir;
    const auto file = dir / "trace.tsv";
    append_trace(record("p", 1), file);
    const auto full = format_trace_line(record("p", 2));
    write_file_atomic(file, read_file(file) + full.substr(0, full.size() / 2));
    CHECK(read_trace(file).size() == 1);
  }

  TEST_CASE("property: every prefix of whole lines reads back") {
    TempDir dir;
    const auto file = dir / "trace.tsv";
    Rng rng(4);
    for (int i = 0; i < 20; ++i) append_trace(random_record(rng), file);
    const auto text = read_file(file);
    std::size_t lines = 0;
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
      if (text[pos] != '\n') continue;
      write_file_atomic(dir / "prefix.tsv", text.substr(0, pos + 1));
      CHECK(read_trace(dir / "prefix.tsv").size() == lines);
      ++lines;
    }
  }

  TEST_CASE("quartiles interpolate between order statistics") {
    const auto s = summarize_samples({4, 1, 3, 2});
    CHECK(s.n == 4);
    CHECK(s.min == 1);
    CHECK(s.q1 == doctest::Approx(1.75));
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.q3 == doctest::Approx(3.25));
    CHECK(s.max == 4);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.std == doctest::Approx(1.2909944));
    const auto one = summarize_samples({7});
    CHECK(one.std == 0);
    CHECK(one.q1 == 7);
    CHECK_FALSE(summarize_samples({}).present());
  }

  TEST_CASE("stats per process exclude cached lines from the metrics") {
    std::vector<TraceRecord> records = {record("a", 100, 0.5, 1000), record("a", 300, 0.7, 3000),
                                        record("b", 50), record("a", 0, {}, {}, "Cached")};
    const auto stats = aggregate_stats(records);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].process == "a");
    CHECK(stats[0].count == 2);
    CHECK(stats[0].cached == 1);
    CHECK(stats[0].metric(Metric::Duration).median == 200);
    CHECK(stats[0].metric(Metric::Memory).max == 3000);
    CHECK(stats[1].count == 1);
    CHECK_FALSE(stats[1].metric(Metric::Cpu).present());

    const auto csv = split(stats_csv(stats), '\n');
    CHECK(csv[0] == kStatsHeader);
    CHECK(csv[1] == "a,2,duration,100,150,200,250,300,200,141.4213562373095");
    CHECK(csv[6] == "b,1,memory,-,-,-,-,-,-,-");
  }

  TEST_CASE("html cells carry exactly the csv numbers") {
    Rng rng(8);
    std::vector<TraceRecord> records;
    for (int i = 0; i < 40; ++i) records.push_back(random_record(rng));
    const auto stats = aggregate_stats(records);
    std::map<std::string, std::string> from_csv;
    const char* fields[] = {"min", "q1", "median", "q3", "max", "mean", "std"};
    for (const auto& line : split(stats_csv(stats), '\n')) {
      if (line.empty() || line == kStatsHeader) continue;
      const auto f = split(line, ',');
      for (int i = 0; i < 7; ++i) from_csv[f[0] + "/" + f[2] + "/" + fields[i]] = f[3 + i];
    }
    const auto html = stats_html(stats, "run");
    const std::regex cell(R"re(<td data-process="([^"]+)" data-metric="([^"]+)" data-field="([^"]+)">([^<]*)</td>)re");
    std::size_t cells = 0;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), cell); it != std::sregex_iterator(); ++it) {
      CHECK(from_csv.at((*it)[1].str() + "/" + (*it)[2].str() + "/" + (*it)[3].str()) == (*it)[4].str());
      ++cells;
    }
    CHECK(cells == from_csv.size());
  }

  TEST_CASE("report has a section per process with three panels") {
    TempDir dir;
    append_trace(record("wind", 10, 0.5), dir / "trace.tsv");
    append_trace(record("design", 20, 0.9), dir / "trace.tsv");
    const auto files = render_provenance_report(dir.path());
    const auto html = read_file(files.html);
    const std::regex section("<section class=\"process\""), panel("<figure class=\"panel\"");
    CHECK(std::distance(std::sregex_iterator(html.begin(), html.end(), section), std::sregex_iterator()) == 2);
    CHECK(std::distance(std::sregex_iterator(html.begin(), html.end(), panel), std::sregex_iterator()) == 6);
    CHECK(html.find("metric unavailable") != std::string::npos);
    CHECK(split(read_file(files.csv), '\n').size() == 1 + 6 + 1);
  }

  TEST_CASE("a run without records has no report") {
    TempDir dir;
    init_trace(dir / "trace.tsv");
    CHECK_THROWS_AS(render_provenance_report(dir.path()), EmptyInput);
  }
}
