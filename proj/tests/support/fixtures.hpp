#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cameo/digest.hpp"
#include "cameo/optimizer.hpp"

namespace cameo::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "cameo-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

/// Two-hour instance: free wind in hour 1, $100 in hour 2, 1 MW / 1 h battery, RTE 1.
opt::SizingCase hand_instance(double cost_usd_per_kw);

/// One-day scenario-set case with `hours` hours and seeded random data.
opt::SizingCase random_tiny_case(std::uint64_t seed, std::size_t hours);

/// One-day set case and a (1,1) tree case over the same hours with p_rt = p_da.
struct CollapsePair {
  opt::SizingCase a;
  opt::SizingCase b;
};
CollapsePair collapse_pair(std::uint64_t seed, std::size_t hours);

/// Minimal workflow document with an exec process per entry of `commands`, fed by a
/// literal channel of `n` integers.
std::string exec_sweep_workflow(std::size_t n, const std::string& command, int retries = 0);

}  // namespace cameo::testing
