#include <cstdio>

#include "levinson/acceptance.hpp"

int main() {
  using namespace levinson::acceptance;
  const auto results = run({}, [](const Result& r) {
    std::printf("%s\n", format(r).c_str());
    std::fflush(stdout);
  });
  int failed = 0;
  for (const auto& r : results) failed += r.ran && !r.pass;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
