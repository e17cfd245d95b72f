#include "tenring/parallel.hpp"

#include <cstdlib>
#include <string>

namespace tenring {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t worker_count() {
  if (const std::size_t n = g_override.load()) return n;
  if (const char* env = std::getenv("TENRING_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return std::size_t(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void set_worker_count(std::size_t n) { g_override = n; }

}  // namespace tenring
