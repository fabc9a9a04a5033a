#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nkmart/random.hpp"

namespace nkmart {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// A mean is flagged diverging if it grows by more than growth_ratio over each of
// `rounds` consecutive sample doublings, or if the Hill tail index of the positive
// samples is at or below tail_index_threshold.
struct DivergenceRule {
  double growth_ratio = 1.10;
  std::size_t rounds = 3;
  double tail_index_threshold = 1.2;
  double tail_fraction = 0.01;
  std::size_t min_tail = 20;
  std::size_t min_round_size = 16;
};

struct EstimateReport {
  double value = 0.0;
  double std_error = 0.0;
  Interval ci95;
  std::size_t n_samples = 0;
  bool diverging = false;
  RandomStreamSpec seed;
  // Means over the nested prefixes n/2^rounds, ..., n/2, n.
  std::vector<double> doubling_means;
  // Hill estimate; NaN when there are too few positive samples.
  double tail_index = 0.0;
};

EstimateReport make_report(double value, double std_error, std::size_t n, RandomStreamSpec seed);

EstimateReport summarize_mean(std::span<const double> samples, RandomStreamSpec seed,
                              const DivergenceRule& rule = {});

EstimateReport summarize_proportion(std::size_t hits, std::size_t n, RandomStreamSpec seed);

double hill_tail_index(std::span<const double> samples, std::size_t k);

double normal_cdf(double x);

// Two-sided Mann-Whitney U test p-value (normal approximation with tie correction).
double mann_whitney_p_value(std::span<const double> a, std::span<const double> b);

}  // namespace nkmart
