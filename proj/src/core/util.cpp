#include "core/util.hpp"

#include <algorithm>
#include <cstdlib>

namespace aplab {

namespace {

std::uint64_t read_env_u64(const char* name, std::uint64_t fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  unsigned long long parsed = std::strtoull(v, &end, 10);
  if (end == v || parsed == 0) return fallback;
  return parsed;
}

}  // namespace

std::uint64_t enumeration_budget() {
  static const std::uint64_t cap = read_env_u64("APLAB_BUDGET", 100000000ull);
  return cap;
}

unsigned worker_count() {
  static const unsigned workers = [] {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(read_env_u64("APLAB_WORKERS", std::min(hw, 8u)));
  }();
  return workers;
}

void check_budget(double states, const std::string& what) {
  if (states > static_cast<double>(enumeration_budget()))
    throw BudgetError(what + " needs ~" + std::to_string(states) +
                      " states, over the configured cap of " +
                      std::to_string(enumeration_budget()) +
                      " (raise APLAB_BUDGET or shrink the instance)");
}

}  // namespace aplab
