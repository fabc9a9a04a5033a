#include "nkmart/random.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace nkmart {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStreamSpec RandomStreamSpec::derive(std::uint64_t child) const {
  return {master_seed, splitmix64(stream_index ^ splitmix64(child + 0x632BE59BD9B4E019ULL))};
}

std::uint64_t RandomStreamSpec::engine_seed() const {
  return splitmix64(master_seed ^ splitmix64(stream_index));
}

std::size_t worker_count() {
  if (const char* env = std::getenv("NKMART_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace nkmart
