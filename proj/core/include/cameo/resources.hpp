#pragma once

#include <sys/types.h>

#include <cstdint>
#include <optional>

namespace cameo {

inline constexpr std::int64_t kSampleIntervalMs = 250;

struct ResourceSample {
  std::int64_t t_ms = 0;  // since task start
  std::optional<double> cpu_seconds;
  std::optional<std::uint64_t> rss_bytes;
};

/// What a finished attempt reports: mean CPU fraction (cpu time / wall time) and peak
/// resident bytes. An unavailable metric stays empty; it is never reported as zero.
struct ResourceUsage {
  std::optional<double> cpu_fraction;
  std::optional<std::uint64_t> peak_rss_bytes;
};

/// CPU time of the calling thread, for in-process builtins sharing one address space
/// (where resident memory cannot be attributed to a task).
class ThreadCpuTimer {
 public:
  ThreadCpuTimer();
  /// CPU seconds consumed by the constructing thread since construction; empty when the
  /// platform has no per-thread clock.
  std::optional<double> elapsed() const;

 private:
  std::optional<double> start_;
};

/// Reads /proc/<pid>: CPU seconds (utime + stime) and resident bytes. Empty fields when
/// the platform does not expose them.
ResourceSample sample_process(pid_t pid, std::int64_t t_ms);

bool process_stats_available();

}  // namespace cameo
