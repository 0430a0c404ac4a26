#pragma once

// JSON serialization of module results.

#include <json.hpp>
#include <optional>

#include "wml/integrability.hpp"
#include "wml/montecarlo.hpp"
#include "wml/radial_ode.hpp"
#include "wml/soliton.hpp"
#include "wml/spectral.hpp"

namespace wml {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "1.0.0";

/// Finite doubles as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
Json number_json(double v);
/// Inverse of number_json.
double number_from_json(const Json& j);

Json to_json(const ModelManifold& M);
Json to_json(const IntegrabilityVerdict& v);
Json to_json(const ClassificationReport& r);
Json to_json(const BrooksResult& b);
Json to_json(const EigenResult& e);
Json to_json(const EssSpecReport& e);
Json to_json(const BoundValue& b);
Json to_json(const BrooksEssRecord& b);
Json to_json(const SimConfig& c);
Json to_json(const SimReport& r);
Json to_json(const RadialProfile& p);
Json to_json(const MassStudy& s);
Json to_json(const SolitonAudit& a);

}  // namespace wml
