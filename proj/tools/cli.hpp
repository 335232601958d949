#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <ostream>

namespace cameo::cli {

/// Set by the SIGINT handler; a running workflow drains and stops when it is raised.
std::atomic<bool>& interrupt_flag();

/// Writes sites.csv, batteries.json and history.csv (synthetic, `days` days per site).
void write_demo_data(const std::filesystem::path& dir, std::uint64_t seed, std::size_t days);

/// Exit codes: 0 success, 1 validation or run failure, 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cameo::cli
