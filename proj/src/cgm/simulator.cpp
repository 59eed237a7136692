#include "cgft/cgm/simulator.hpp"

#include "cgft/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cgft::cgm {

void SensorProfile::validate() const {
    if (!valid_device_id(device_id)) {
        throw InvalidArgument("sensor profile: invalid device id '" + device_id + "'");
    }
    if (!(baseline >= 60.0 && baseline <= 300.0)) {
        throw InvalidArgument("sensor profile: baseline must be in [60, 300] mg/dl");
    }
    if (!(meal_amplitude >= 0.0) || !(noise_stddev >= 0.0)) {
        throw InvalidArgument("sensor profile: amplitude and noise must be non-negative");
    }
    if (rise.count() <= 0 || half_life.count() <= 0) {
        throw InvalidArgument("sensor profile: rise and half-life must be positive");
    }
}

double meal_response(const SensorProfile& profile, std::chrono::seconds since_meal) {
    using std::chrono::duration;
    if (since_meal.count() < 0) {
        return 0.0;
    }
    const double t = duration<double, std::ratio<60>>(since_meal).count();
    const double rise = static_cast<double>(profile.rise.count());
    if (t <= rise) {
        return profile.meal_amplitude * t / rise;
    }
    const double decay = std::numbers::ln2 / static_cast<double>(profile.half_life.count());
    return profile.meal_amplitude * std::exp(-decay * (t - rise));
}

double expected_glucose(const SensorProfile& profile, std::chrono::seconds offset) {
    double value = profile.baseline;
    for (auto meal : profile.meal_offsets) {
        value += meal_response(profile, offset - meal);
    }
    return value;
}

SensorSimulator::SensorSimulator(SensorProfile profile) : profile_(std::move(profile)), rng_(profile_.seed) {
    profile_.validate();
}

Timestamp SensorSimulator::next_time() const {
    return profile_.start + kSamplePeriod * static_cast<long>(seq_);
}

GlucoseReading SensorSimulator::next() {
    const auto offset = kSamplePeriod * static_cast<long>(seq_);
    double value = expected_glucose(profile_, offset);
    if (profile_.noise_stddev > 0.0) {
        value += rng_.normal(0.0, profile_.noise_stddev);
    }
    value = std::clamp(value, kMinGlucose, kMaxGlucose);
    // Sensors report to 0.1 mg/dl.
    value = std::round(value * 10.0) / 10.0;
    GlucoseReading r{profile_.device_id, seq_, profile_.start + offset, value};
    ++seq_;
    return r;
}

std::vector<GlucoseReading> simulate_sensor(const SensorProfile& profile, std::chrono::minutes duration) {
    SensorSimulator sim(profile);
    std::vector<GlucoseReading> out;
    const auto end = profile.start + duration;
    while (sim.next_time() < end) {
        out.push_back(sim.next());
    }
    return out;
}

} // namespace cgft::cgm
