#pragma once

// JSON building blocks shared by the report writers.

#include <nlohmann/json.hpp>

#include "slicekit/report.hpp"

namespace slicekit {

/// Finite values as numbers, others as "inf" / "-inf" / "nan".
nlohmann::ordered_json real_json(double v);
nlohmann::ordered_json report_json(const CheckReport& report);

}  // namespace slicekit
