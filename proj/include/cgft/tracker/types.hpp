#pragma once

#include "cgft/cgm/reading.hpp"
#include "cgft/tracker/alerts.hpp"
#include "cgft/tracker/glucose_state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cgft::tracker {

enum class DiabeticStatus { non_diabetic, pre_diabetic, diabetic };

std::string to_string(DiabeticStatus status);
DiabeticStatus parse_diabetic_status(const std::string& text);

struct PatientProfile {
    std::string patient_id;
    std::string display_name;
    DiabeticStatus status = DiabeticStatus::non_diabetic;
    std::optional<std::string> device_id;
    std::vector<std::string> doctor_contacts;
    std::vector<std::string> family_contacts;

    friend bool operator==(const PatientProfile&, const PatientProfile&) = default;
};

struct MealEvent {
    std::string meal_id;
    std::string patient_id;
    Timestamp timestamp{};
    std::string predicted_category; ///< merged class name
    double confidence = 0.0;
    /// Names the patient may confirm: the group's members for a merged
    /// class, else just the predicted name.
    std::vector<std::string> disambiguation;
    std::optional<std::string> confirmed_category;
    std::optional<std::string> image_ref;

    /// Annotation shown on the timeline: confirmed if present, else predicted.
    [[nodiscard]] const std::string& category() const noexcept {
        return confirmed_category ? *confirmed_category : predicted_category;
    }

    friend bool operator==(const MealEvent&, const MealEvent&) = default;
};

struct Timeline {
    std::vector<cgm::GlucoseReading> readings; ///< ordered by time
    std::vector<MealEvent> meals;              ///< ordered by time

    friend bool operator==(const Timeline&, const Timeline&) = default;
};

/// Latest known state of a patient.
struct PatientState {
    std::optional<cgm::GlucoseReading> reading;
    std::optional<GlucoseState> state;
    std::optional<Timestamp> last_meal;

    friend bool operator==(const PatientState&, const PatientState&) = default;
};

} // namespace cgft::tracker
