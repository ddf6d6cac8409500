#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "driftlane/core.hpp"

namespace driftlane {

// Optional per-method overrides (hidden_units, n_members, ...). Unknown keys
// are rejected so typos in experiment specs fail loudly.
using MethodParams = std::map<std::string, double>;

// All method ids the experiment runner accepts.
const std::vector<std::string>& method_roster();

bool is_known_method(const std::string& id);

// Builds a learner by roster id with its documented defaults. Throws
// ConfigError for unknown ids or unsupported parameter keys.
ClassifierPtr make_classifier(const std::string& id, std::uint64_t seed,
                              const MethodParams& params = {});

} // namespace driftlane
