#pragma once

#include <string>

#include <json.hpp>

#include "woldlab/equivalence.hpp"
#include "woldlab/near_isometry.hpp"
#include "woldlab/spaces.hpp"
#include "woldlab/twisted.hpp"

namespace woldlab {

using json = nlohmann::ordered_json;

struct DeserializationError : Error { using Error::Error; };

constexpr int kSchemaVersion = 1;

json to_json(const SpaceDescriptor& s);
SpaceDescriptor space_from_json(const json& j);

// {"rows", "cols", "entries": row-major [re, im] pairs}
json to_json(const Operator& a);
Operator operator_from_json(const json& j);

json to_json(const Tolerances& t);

// {"n", "ops": [...], "twists": {"i,j": operator}}
json to_json(const TwistedTuple& t);
// Validates shape, unitarity and commutation of the twists; failures name the invariant.
TwistedTuple tuple_from_json(const json& j, const Tolerances& tol = {});
TwistedTuple load_tuple(const std::string& path, const Tolerances& tol = {});
void save_tuple(const TwistedTuple& t, const std::string& path);

json subset_json(SubsetIndex a, int n);

json to_json(const NearIsometryReport& r);
json to_json(const TwistedReport& r);
json to_json(const LemmaReport& r);
json to_json(const DecompositionResult& r);
json to_json(const ReducingReport& r);
json to_json(const WeightedShiftModel& m);
json to_json(const MultishiftModel& m, int n);
json to_json(const EquivalenceReport& r, int n, int order);
json to_json(const WanderingEquivalence& r, int n, int order);

// Replaces non-finite numbers by strings so that reports stay valid JSON.
double finite_or_sentinel(double x);

}  // namespace woldlab
