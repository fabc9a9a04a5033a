#include "nkmart/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "nkmart/errors.hpp"

namespace nkmart {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

EstimateReport make_report(double value, double std_error, std::size_t n, RandomStreamSpec seed) {
  EstimateReport r;
  r.value = value;
  r.std_error = std_error;
  r.ci95 = {value - 1.96 * std_error, value + 1.96 * std_error};
  r.n_samples = n;
  r.seed = seed;
  r.tail_index = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double hill_tail_index(std::span<const double> samples, std::size_t k) {
  std::vector<double> pos;
  pos.reserve(samples.size());
  for (double v : samples) {
    if (v > 0.0 && std::isfinite(v)) pos.push_back(v);
  }
  if (k < 2 || pos.size() <= k) return std::numeric_limits<double>::quiet_NaN();
  std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end(),
                   std::greater<>());
  const double threshold = pos[k];
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(pos[i] / threshold);
  if (sum <= 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(k) / sum;
}

EstimateReport summarize_mean(std::span<const double> samples, RandomStreamSpec seed,
                              const DivergenceRule& rule) {
  const std::size_t n = samples.size();
  if (n == 0) throw InvalidArgument("cannot summarize an empty sample");
  bool has_inf = false;
  double sum = 0.0;
  for (double v : samples) {
    if (std::isnan(v)) throw NumericError("sample contains NaN");
    if (std::isinf(v)) has_inf = true;
    sum += v;
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  if (!has_inf) {
    for (double v : samples) ss += (v - mean) * (v - mean);
  }
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  const double se = has_inf ? std::numeric_limits<double>::infinity()
                            : std::sqrt(var / static_cast<double>(n));
  EstimateReport r = make_report(mean, se, n, seed);

  std::size_t rounds = 0;
  while (rounds < rule.rounds && (n >> (rounds + 1)) >= rule.min_round_size) ++rounds;
  for (std::size_t j = rounds + 1; j-- > 0;) {
    const std::size_t m = n >> j;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += samples[i];
    r.doubling_means.push_back(s / static_cast<double>(m));
  }
  bool growth = rounds == rule.rounds && rounds > 0;
  for (std::size_t j = 1; growth && j < r.doubling_means.size(); ++j) {
    const double prev = r.doubling_means[j - 1];
    growth = prev > 0.0 && r.doubling_means[j] > rule.growth_ratio * prev;
  }

  const auto k = std::max<std::size_t>(
      rule.min_tail, static_cast<std::size_t>(rule.tail_fraction * static_cast<double>(n)));
  r.tail_index = hill_tail_index(samples, k);
  const bool heavy = !std::isnan(r.tail_index) && r.tail_index <= rule.tail_index_threshold;
  r.diverging = has_inf || growth || heavy;
  return r;
}

EstimateReport summarize_proportion(std::size_t hits, std::size_t n, RandomStreamSpec seed) {
  if (n == 0) throw InvalidArgument("cannot summarize an empty sample");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return make_report(p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed);
}

double mann_whitney_p_value(std::span<const double> a, std::span<const double> b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na == 0 || nb == 0) throw InvalidArgument("both samples must be non-empty");
  struct Item {
    double v;
    bool from_a;
  };
  std::vector<Item> all;
  all.reserve(na + nb);
  for (double v : a) all.push_back({v, true});
  for (double v : b) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Item& x, const Item& y) { return x.v < y.v; });
  const double big_n = static_cast<double>(na + nb);
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].v == all[i].v) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t m = i; m < j; ++m) {
      if (all[m].from_a) rank_sum_a += avg_rank;
    }
    i = j;
  }
  const double fa = static_cast<double>(na);
  const double fb = static_cast<double>(nb);
  const double u = rank_sum_a - fa * (fa + 1.0) / 2.0;
  const double mu = fa * fb / 2.0;
  const double var = fa * fb / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return 2.0 * (1.0 - normal_cdf(z));
}

}  // namespace nkmart
