#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nkmart {

struct RandomStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  // Child stream, e.g. one per simulation block.
  [[nodiscard]] RandomStreamSpec derive(std::uint64_t child) const;
  [[nodiscard]] std::uint64_t engine_seed() const;

  friend bool operator==(const RandomStreamSpec&, const RandomStreamSpec&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

class NormalStream {
 public:
  explicit NormalStream(const RandomStreamSpec& spec) : engine_(spec.engine_seed()) {}
  double operator()() { return dist_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

// Worker threads for block-parallel loops: NKMART_WORKERS if set, else hardware concurrency.
std::size_t worker_count();

}  // namespace nkmart
