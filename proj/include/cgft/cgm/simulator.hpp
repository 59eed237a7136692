#pragma once

#include "cgft/cgm/reading.hpp"
#include "cgft/common/rng.hpp"

#include <chrono>
#include <vector>

namespace cgft::cgm {

inline constexpr std::chrono::minutes kSamplePeriod{15};
inline constexpr std::chrono::minutes kRelayPeriod{5};

/// Drives the simulated sensor. Each meal adds a linear rise to
/// `meal_amplitude` over `rise`, then an exponential decay with `half_life`.
struct SensorProfile {
    std::string device_id = "S1";
    Timestamp start{};
    double baseline = 100.0; ///< mg/dl, in [60, 300]
    double meal_amplitude = 90.0;
    std::chrono::minutes rise{30};
    std::chrono::minutes half_life{90};
    double noise_stddev = 0.0;
    std::vector<std::chrono::minutes> meal_offsets; ///< meal times relative to start
    std::uint64_t seed = 1;

    /// Throws InvalidArgument.
    void validate() const;
};

/// Noise-free excursion caused by one meal, `since_meal` after it.
double meal_response(const SensorProfile& profile, std::chrono::seconds since_meal);

/// Noise-free, unclamped glucose at `offset` after profile.start.
double expected_glucose(const SensorProfile& profile, std::chrono::seconds offset);

/// Emits one reading per 15 simulated minutes starting at profile.start, seq
/// counting from 0. Deterministic given profile.seed.
class SensorSimulator {
  public:
    explicit SensorSimulator(SensorProfile profile);

    GlucoseReading next();
    [[nodiscard]] Timestamp next_time() const;
    [[nodiscard]] const SensorProfile& profile() const noexcept { return profile_; }

  private:
    SensorProfile profile_;
    Rng rng_;
    std::uint64_t seq_ = 0;
};

/// All readings with timestamp in [start, start + duration).
std::vector<GlucoseReading> simulate_sensor(const SensorProfile& profile, std::chrono::minutes duration);

} // namespace cgft::cgm
