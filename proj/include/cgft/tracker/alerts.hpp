#pragma once

#include "cgft/cgm/reading.hpp"
#include "cgft/tracker/glucose_state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cgft::tracker {

enum class Severity { high, very_high };
enum class Role { patient, doctor, family };

std::string to_string(Severity severity);
std::string to_string(Role role);
Severity parse_severity(const std::string& text);
Role parse_role(const std::string& text);

inline constexpr const char* kActivityAdvice = "physical activity";
inline constexpr const char* kLowCarbAdvice = "avoid high-carbohydrate food";

struct AlertPolicy {
    StateThresholds bands;
    double very_high = 300.0; ///< mg/dl, regardless of context
    double hysteresis = 10.0; ///< re-arm once the value is this far below the trigger threshold

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const AlertPolicy&, const AlertPolicy&) = default;
};

struct AlertDecision {
    Severity severity = Severity::high;
    double threshold = 0.0; ///< the bound the value crossed
    std::vector<Role> recipients;
    std::vector<std::string> recommendations;
};

/// Hysteresis state for one patient.
///
/// A severity fires when the value reaches its threshold while armed and
/// then stays silent until a value at or below (threshold - hysteresis).
/// High uses the diabetic bound of the current context. A very-high reading
/// raises only the very-high alert and also silences high.
class AlertGate {
  public:
    std::optional<AlertDecision> evaluate(double value, const GlucoseState& state, const AlertPolicy& policy);

    [[nodiscard]] bool high_armed() const noexcept { return !high_trigger_; }
    [[nodiscard]] bool very_high_armed() const noexcept { return !very_high_trigger_; }

  private:
    std::optional<double> high_trigger_;
    std::optional<double> very_high_trigger_;
};

struct Alert {
    std::string alert_id;
    std::string patient_id;
    Severity severity = Severity::high;
    cgm::GlucoseReading reading;
    Timestamp created_at{};
    GlucoseState state;
    std::vector<Role> recipients;
    std::vector<std::string> recommendations;

    [[nodiscard]] bool visible_to(Role role) const;

    friend bool operator==(const Alert&, const Alert&) = default;
};

} // namespace cgft::tracker
