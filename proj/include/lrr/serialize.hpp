#pragma once
//
// JSON views of the report types. Non-finite numbers become null.
//

#include <vector>

#include <json.hpp>

#include "lrr/bench.hpp"
#include "lrr/diagnostics.hpp"
#include "lrr/oracle.hpp"
#include "lrr/solve.hpp"

namespace lrr {

nlohmann::json json_number(double v);

/// Estimates are omitted unless include_estimate is set (they can be large).
nlohmann::json to_json(const SolverReport& r, bool include_estimate = false);
nlohmann::json to_json(const CoherenceReport& r);
nlohmann::json to_json(const RipEstimate& r);
nlohmann::json to_json(const std::vector<AdvisorRow>& rows);
nlohmann::json to_json(const BoundReport& b);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentResult& r);

} // namespace lrr
