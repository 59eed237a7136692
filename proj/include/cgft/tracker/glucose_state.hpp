#pragma once

#include "cgft/common/time.hpp"

#include <chrono>
#include <optional>
#include <string>

namespace cgft::tracker {

enum class MealContext { fasting, after_eating, two_hours_after, unclassified };
enum class GlucoseBand { non_diabetic, pre_diabetic, diabetic };

std::string to_string(MealContext context);
std::string to_string(GlucoseBand band);
MealContext parse_meal_context(const std::string& text);
GlucoseBand parse_glucose_band(const std::string& text);

struct GlucoseState {
    MealContext context = MealContext::fasting;
    GlucoseBand band = GlucoseBand::non_diabetic;

    friend bool operator==(const GlucoseState&, const GlucoseState&) = default;
};

/// Lower bounds (mg/dl) of the pre-diabetic and diabetic bands. A value equal
/// to a bound falls in the more severe band.
struct BandBounds {
    double pre_diabetic = 0.0;
    double diabetic = 0.0;

    friend bool operator==(const BandBounds&, const BandBounds&) = default;
};

struct StateThresholds {
    BandBounds fasting{101.0, 126.0};
    BandBounds after_eating{190.0, 220.0};
    BandBounds two_hours_after{140.0, 200.0};

    /// Bounds used for a context; unclassified shares the fasting bounds.
    [[nodiscard]] const BandBounds& bounds(MealContext context) const noexcept;

    /// Throws ConfigError unless pre_diabetic < diabetic for every context.
    void validate() const;

    friend bool operator==(const StateThresholds&, const StateThresholds&) = default;
};

inline constexpr std::chrono::hours kAfterEatingWindow{2};
inline constexpr std::chrono::hours kTwoHoursAfterWindow{4};
inline constexpr std::chrono::hours kFastingGap{8};

/// after-eating when the last meal lies in (0, 2h] before now, two-hours-after
/// in (2h, 4h], fasting with no meal or one at least 8h old, else unclassified.
MealContext meal_context(std::optional<Timestamp> last_meal, Timestamp now);

/// Throws InvalidArgument for values outside [20, 600] mg/dl.
GlucoseBand classify_band(MealContext context, double value, const StateThresholds& thresholds = {});

GlucoseState classify_glucose_state(double value, std::optional<Timestamp> last_meal, Timestamp now,
                                    const StateThresholds& thresholds = {});

} // namespace cgft::tracker
