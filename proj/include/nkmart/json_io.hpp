#pragma once

#include <string>

#include <json.hpp>

#include "nkmart/estimate.hpp"
#include "nkmart/random.hpp"

namespace nkmart {

// 15 significant digits; non-finite values print as inf, -inf, nan.
std::string format_number(double v);

// Finite values rounded to 15 significant digits; non-finite values become strings.
nlohmann::json json_number(double v);

nlohmann::json to_json(const RandomStreamSpec& seed);
nlohmann::json to_json(const EstimateReport& report);

}  // namespace nkmart
