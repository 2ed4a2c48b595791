// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.
#include <cstdlib>
#include <iostream>

#include "ufsim/matrix.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  int failed = 0;
  for (const auto& r : ufsim::evaluate_acceptance(seed)) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << "): " << r.detail
              << std::endl;
    failed += r.pass ? 0 : 1;
  }
  std::cout << (10 - failed) << "/10 criteria pass" << std::endl;
  return failed ? 1 : 0;
}
