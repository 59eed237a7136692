#pragma once

#include "cgft/common/time.hpp"

#include <cstdint>
#include <string>

namespace cgft::cgm {

inline constexpr double kMinGlucose = 20.0;  // mg/dl
inline constexpr double kMaxGlucose = 600.0; // mg/dl

/// One timestamped sensor sample.
struct GlucoseReading {
    std::string device_id;
    std::uint64_t seq = 0; ///< strictly increasing per device
    Timestamp timestamp{};
    double glucose = 0.0; ///< mg/dl

    friend bool operator==(const GlucoseReading&, const GlucoseReading&) = default;
};

/// Device id rules shared by the wire format and the store: non-empty, no
/// commas, no control characters.
bool valid_device_id(const std::string& id);

/// Throws InvalidArgument when the device id or glucose value is invalid.
void validate(const GlucoseReading& reading);

} // namespace cgft::cgm
