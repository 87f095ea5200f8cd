#pragma once

#include "melnikov/config.hpp"
#include "melnikov/melnikov.hpp"
#include "melnikov/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace melnikov {

using Json = nlohmann::ordered_json;

Json to_json(const Vec& v);
Json to_json(const Phase& ph);
Json to_json(const ScalarValue& v);
Json to_json(const VectorValue& v);
Json to_json(const CriticalPoint& c);
Json to_json(const ReducedSample& s);
Json to_json(const OrderFit& f);
Json to_json(const GraphPoint& g);
Json to_json(const SplittingReport& r);
Json to_json(const JumpReport& r);

/// Wraps a command result with the tool version and the configuration hash.
Json envelope(const std::string& command, const RunConfig& cfg, Json result);

/// CSV with columns eps, measured, predicted, residual (one row per component).
void write_splitting_csv(std::ostream& os, const SplittingReport& r);
void write_jump_csv(std::ostream& os, const JumpReport& r);

}  // namespace melnikov
