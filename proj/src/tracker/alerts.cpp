#include "cgft/tracker/alerts.hpp"

#include "cgft/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace cgft::tracker {

std::string to_string(Severity severity) {
    return severity == Severity::high ? "high" : "very-high";
}

std::string to_string(Role role) {
    switch (role) {
    case Role::patient:
        return "patient";
    case Role::doctor:
        return "doctor";
    case Role::family:
        return "family";
    }
    return "?";
}

Severity parse_severity(const std::string& text) {
    if (text == "high") {
        return Severity::high;
    }
    if (text == "very-high") {
        return Severity::very_high;
    }
    throw InvalidArgument("unknown alert severity '" + text + "'");
}

Role parse_role(const std::string& text) {
    for (auto r : {Role::patient, Role::doctor, Role::family}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw InvalidArgument("unknown role '" + text + "' (expected patient, doctor or family)");
}

void AlertPolicy::validate() const {
    bands.validate();
    if (!std::isfinite(very_high) || very_high <= 0.0) {
        throw ConfigError("very-high threshold must be positive");
    }
    if (!std::isfinite(hysteresis) || hysteresis < 0.0) {
        throw ConfigError("alert hysteresis must be non-negative");
    }
}

std::optional<AlertDecision> AlertGate::evaluate(double value, const GlucoseState& state, const AlertPolicy& policy) {
    if (high_trigger_ && value <= *high_trigger_ - policy.hysteresis) {
        high_trigger_.reset();
    }
    if (very_high_trigger_ && value <= *very_high_trigger_ - policy.hysteresis) {
        very_high_trigger_.reset();
    }

    const double diabetic = policy.bands.bounds(state.context).diabetic;
    std::optional<AlertDecision> decision;
    if (value >= policy.very_high) {
        if (!very_high_trigger_) {
            very_high_trigger_ = policy.very_high;
            decision = AlertDecision{Severity::very_high, policy.very_high, {Role::patient, Role::doctor, Role::family}, {}};
        }
        if (!high_trigger_ && value >= diabetic) {
            high_trigger_ = diabetic;
        }
    } else if (state.band == GlucoseBand::diabetic && !high_trigger_) {
        high_trigger_ = diabetic;
        decision = AlertDecision{Severity::high, diabetic, {Role::patient}, {}};
    }
    if (decision) {
        decision->recommendations.emplace_back(kActivityAdvice);
        if (state.context == MealContext::after_eating || state.context == MealContext::two_hours_after) {
            decision->recommendations.emplace_back(kLowCarbAdvice);
        }
    }
    return decision;
}

bool Alert::visible_to(Role role) const {
    return std::find(recipients.begin(), recipients.end(), role) != recipients.end();
}

} // namespace cgft::tracker
