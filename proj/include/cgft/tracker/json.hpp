#pragma once

#include "cgft/tracker/types.hpp"

#include <nlohmann/json.hpp>

namespace cgft::cgm {

void to_json(nlohmann::json& j, const GlucoseReading& r);
/// Throws InvalidArgument on a missing field or bad timestamp.
void from_json(const nlohmann::json& j, GlucoseReading& r);

} // namespace cgft::cgm

namespace cgft::tracker {

void to_json(nlohmann::json& j, const GlucoseState& s);
void from_json(const nlohmann::json& j, GlucoseState& s);

void to_json(nlohmann::json& j, const PatientProfile& p);
/// Requires patient_id; other fields default. Throws InvalidArgument.
void from_json(const nlohmann::json& j, PatientProfile& p);

/// Adds the derived "category" annotation.
void to_json(nlohmann::json& j, const MealEvent& m);
void from_json(const nlohmann::json& j, MealEvent& m);

void to_json(nlohmann::json& j, const Alert& a);
void from_json(const nlohmann::json& j, Alert& a);

void to_json(nlohmann::json& j, const Timeline& t);
void to_json(nlohmann::json& j, const PatientState& s);

} // namespace cgft::tracker
