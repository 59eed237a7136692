#pragma once

#include "cgft/cgm/reading.hpp"
#include "cgft/common/error.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace cgft::cgm {

// Frame: CGM,<device_id>,<seq>,<RFC3339 UTC>,<mg/dl decimal>\n
// Ack:   OK,<seq>\n  or  ERR,<reason>\n

enum class FrameErrorKind {
    field_count,
    bad_prefix,
    bad_device_id,
    bad_sequence,
    bad_timestamp,
    bad_number,
    out_of_range,
};

/// Stable token used in ERR acks, e.g. "out-of-range".
std::string_view to_string(FrameErrorKind kind);

class FrameError : public DataError {
  public:
    FrameError(FrameErrorKind kind, const std::string& detail);
    [[nodiscard]] FrameErrorKind kind() const noexcept { return kind_; }

  private:
    FrameErrorKind kind_;
};

/// The frame without its trailing newline. Glucose is printed as the shortest
/// decimal that reads back to the same double, always with a fractional part.
std::string encode_frame(const GlucoseReading& reading);

/// Accepts one line with or without a trailing "\n" / "\r\n".
/// Throws FrameError.
GlucoseReading parse_frame(std::string_view line);

std::string format_glucose(double mgdl);

struct Ack {
    bool ok = false;
    std::uint64_t seq = 0; ///< valid when ok
    std::string reason;    ///< valid when !ok
};

std::string encode_ack(std::uint64_t seq);
std::string encode_nack(std::string_view reason);
std::optional<Ack> parse_ack(std::string_view line);

} // namespace cgft::cgm
