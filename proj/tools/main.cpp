#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

extern "C" void on_interrupt(int) { cameo::cli::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  return cameo::cli::cli_main(argc, argv, std::cout, std::cerr);
}
