// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fail.

#include <cstdio>
#include <filesystem>

#include "memsim/acceptance.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : MEMSIM_CONFIG_DIR;
  const auto results = memsim::run_acceptance(dir);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s\n", memsim::format_criterion(r).c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
