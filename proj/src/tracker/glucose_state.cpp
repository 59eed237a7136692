#include "cgft/tracker/glucose_state.hpp"

#include "cgft/cgm/reading.hpp"
#include "cgft/common/error.hpp"

#include <cmath>

namespace cgft::tracker {

std::string to_string(MealContext context) {
    switch (context) {
    case MealContext::fasting:
        return "fasting";
    case MealContext::after_eating:
        return "after-eating";
    case MealContext::two_hours_after:
        return "two-hours-after";
    case MealContext::unclassified:
        return "unclassified";
    }
    return "?";
}

std::string to_string(GlucoseBand band) {
    switch (band) {
    case GlucoseBand::non_diabetic:
        return "non-diabetic-range";
    case GlucoseBand::pre_diabetic:
        return "pre-diabetic-range";
    case GlucoseBand::diabetic:
        return "diabetic-range";
    }
    return "?";
}

MealContext parse_meal_context(const std::string& text) {
    for (auto c : {MealContext::fasting, MealContext::after_eating, MealContext::two_hours_after,
                   MealContext::unclassified}) {
        if (to_string(c) == text) {
            return c;
        }
    }
    throw InvalidArgument("unknown meal context '" + text + "'");
}

GlucoseBand parse_glucose_band(const std::string& text) {
    for (auto b : {GlucoseBand::non_diabetic, GlucoseBand::pre_diabetic, GlucoseBand::diabetic}) {
        if (to_string(b) == text) {
            return b;
        }
    }
    throw InvalidArgument("unknown glucose band '" + text + "'");
}

const BandBounds& StateThresholds::bounds(MealContext context) const noexcept {
    switch (context) {
    case MealContext::after_eating:
        return after_eating;
    case MealContext::two_hours_after:
        return two_hours_after;
    case MealContext::fasting:
    case MealContext::unclassified:
        break;
    }
    return fasting;
}

void StateThresholds::validate() const {
    for (auto c : {MealContext::fasting, MealContext::after_eating, MealContext::two_hours_after}) {
        const auto& b = bounds(c);
        if (!std::isfinite(b.pre_diabetic) || !std::isfinite(b.diabetic) || !(b.pre_diabetic < b.diabetic)) {
            throw ConfigError("band bounds for " + to_string(c) + " must satisfy pre-diabetic < diabetic");
        }
    }
}

MealContext meal_context(std::optional<Timestamp> last_meal, Timestamp now) {
    if (!last_meal) {
        return MealContext::fasting;
    }
    const auto elapsed = now - *last_meal;
    if (elapsed >= kFastingGap) {
        return MealContext::fasting;
    }
    if (elapsed > std::chrono::seconds::zero() && elapsed <= kAfterEatingWindow) {
        return MealContext::after_eating;
    }
    if (elapsed > kAfterEatingWindow && elapsed <= kTwoHoursAfterWindow) {
        return MealContext::two_hours_after;
    }
    return MealContext::unclassified;
}

GlucoseBand classify_band(MealContext context, double value, const StateThresholds& thresholds) {
    if (!(value >= cgm::kMinGlucose && value <= cgm::kMaxGlucose)) {
        throw InvalidArgument("glucose value out of range [20, 600] mg/dl: " + std::to_string(value));
    }
    const auto& b = thresholds.bounds(context);
    if (value >= b.diabetic) {
        return GlucoseBand::diabetic;
    }
    if (value >= b.pre_diabetic) {
        return GlucoseBand::pre_diabetic;
    }
    return GlucoseBand::non_diabetic;
}

GlucoseState classify_glucose_state(double value, std::optional<Timestamp> last_meal, Timestamp now,
                                    const StateThresholds& thresholds) {
    const auto context = meal_context(last_meal, now);
    return {context, classify_band(context, value, thresholds)};
}

} // namespace cgft::tracker
