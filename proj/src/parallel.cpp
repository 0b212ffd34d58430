#include "hazardsim/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hazardsim {

std::size_t resolve_threads(int requested) {
  if (requested > 0) return static_cast<std::size_t>(requested);
  if (const char* env = std::getenv("HAZARDSIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace hazardsim
