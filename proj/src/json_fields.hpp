#pragma once

// Shared JSON plumbing for configs and reports (library-internal).

#include "stabsel/config.hpp"

#include <json.hpp>

namespace stabsel::detail {

using Json = nlohmann::ordered_json;

Json config_json(const ExperimentConfig& config);
Json config_json(const SeparationConfig& config);
Json config_json(const GraphConfig& config);
Json config_json(const RunConfig& config);

}  // namespace stabsel::detail
