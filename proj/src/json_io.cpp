#include "nkmart/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace nkmart {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::strtod(format_number(v).c_str(), nullptr);
}

nlohmann::json to_json(const RandomStreamSpec& seed) {
  return {{"master_seed", seed.master_seed}, {"stream_index", seed.stream_index}};
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json rounds = nlohmann::json::array();
  for (double m : r.doubling_means) rounds.push_back(json_number(m));
  return {{"value", json_number(r.value)},
          {"std_error", json_number(r.std_error)},
          {"ci95", {json_number(r.ci95.lo), json_number(r.ci95.hi)}},
          {"n_samples", r.n_samples},
          {"diverging", r.diverging},
          {"doubling_means", rounds},
          {"tail_index", json_number(r.tail_index)},
          {"seed", to_json(r.seed)}};
}

}  // namespace nkmart
