#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cameo {

namespace fs = std::filesystem;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

/// Parses a full-string floating-point value; nullopt on trailing garbage.
std::optional<double> parse_number(std::string_view text);

std::optional<std::int64_t> parse_integer(std::string_view text);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

// ---- CSV ------------------------------------------------------------------

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view value);

// ---- time -----------------------------------------------------------------

/// Parses `YYYY-MM-DDTHH:MM:SSZ` (the trailing Z is optional) to seconds since epoch.
std::optional<std::int64_t> parse_iso_utc(std::string_view text);
std::string format_iso_utc(std::int64_t epoch_seconds);
std::string format_date_utc(std::int64_t epoch_seconds);

/// Wall clock, milliseconds since epoch.
std::int64_t now_ms();

// ---- files ----------------------------------------------------------------

std::string read_file(const fs::path& path);

/// Writes via a sibling temporary file and rename, so readers never see a torn file.
void write_file_atomic(const fs::path& path, std::string_view contents);

// ---- validation findings --------------------------------------------------

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string subject;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  void error(std::string subject, std::string message) {
    findings.push_back({Severity::Error, std::move(subject), std::move(message)});
  }
  void warning(std::string subject, std::string message) {
    findings.push_back({Severity::Warning, std::move(subject), std::move(message)});
  }
  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
  bool contains(std::string_view message_fragment) const;
};

std::string to_string(const Finding& f);

}  // namespace cameo
