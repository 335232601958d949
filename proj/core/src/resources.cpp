#include "cameo/resources.hpp"

#include <pthread.h>
#include <time.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <string>

namespace cameo {

namespace {

std::optional<double> thread_cpu_seconds() {
  clockid_t id;
  if (pthread_getcpuclockid(pthread_self(), &id) != 0) return std::nullopt;
  timespec ts{};
  if (clock_gettime(id, &ts) != 0) return std::nullopt;
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

}  // namespace

ThreadCpuTimer::ThreadCpuTimer() : start_(thread_cpu_seconds()) {}

std::optional<double> ThreadCpuTimer::elapsed() const {
  if (!start_) return std::nullopt;
  auto now = thread_cpu_seconds();
  if (!now) return std::nullopt;
  return *now - *start_;
}

ResourceSample sample_process(pid_t pid, std::int64_t t_ms) {
  ResourceSample s;
  s.t_ms = t_ms;
  const std::string base = "/proc/" + std::to_string(pid);
  static const long ticks = sysconf(_SC_CLK_TCK);
  static const long page = sysconf(_SC_PAGESIZE);

  std::ifstream stat(base + "/stat");
  std::string line;
  if (stat && std::getline(stat, line) && ticks > 0) {
    // The command name may contain spaces; fields resume after the closing parenthesis.
    const auto close = line.rfind(')');
    if (close != std::string::npos) {
      std::istringstream rest(line.substr(close + 2));
      std::string field;
      unsigned long long utime = 0, stime = 0;
      for (int i = 3; rest >> field; ++i) {
        if (i == 14) utime = std::stoull(field);
        if (i == 15) {
          stime = std::stoull(field);
          s.cpu_seconds = static_cast<double>(utime + stime) / static_cast<double>(ticks);
          break;
        }
      }
    }
  }
  std::ifstream statm(base + "/statm");
  unsigned long long size = 0, resident = 0;
  if (statm >> size >> resident && page > 0) s.rss_bytes = resident * static_cast<unsigned long long>(page);
  return s;
}

bool process_stats_available() {
  auto s = sample_process(getpid(), 0);
  return s.cpu_seconds.has_value() && s.rss_bytes.has_value();
}

}  // namespace cameo
