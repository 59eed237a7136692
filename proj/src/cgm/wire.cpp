#include "cgft/cgm/wire.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <vector>

namespace cgft::cgm {

bool valid_device_id(const std::string& id) {
    if (id.empty()) {
        return false;
    }
    for (unsigned char c : id) {
        if (c == ',' || c < 0x20 || c == 0x7F) {
            return false;
        }
    }
    return true;
}

void validate(const GlucoseReading& reading) {
    if (!valid_device_id(reading.device_id)) {
        throw InvalidArgument("invalid device id '" + reading.device_id + "'");
    }
    if (!std::isfinite(reading.glucose) || reading.glucose < kMinGlucose || reading.glucose > kMaxGlucose) {
        throw InvalidArgument("glucose " + std::to_string(reading.glucose) + " mg/dl outside [20, 600]");
    }
}

std::string_view to_string(FrameErrorKind kind) {
    switch (kind) {
    case FrameErrorKind::field_count:
        return "field-count";
    case FrameErrorKind::bad_prefix:
        return "bad-prefix";
    case FrameErrorKind::bad_device_id:
        return "bad-device-id";
    case FrameErrorKind::bad_sequence:
        return "bad-sequence";
    case FrameErrorKind::bad_timestamp:
        return "bad-timestamp";
    case FrameErrorKind::bad_number:
        return "bad-number";
    case FrameErrorKind::out_of_range:
        return "out-of-range";
    }
    return "unknown";
}

FrameError::FrameError(FrameErrorKind kind, const std::string& detail)
    : DataError(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

std::string format_glucose(double mgdl) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), mgdl, std::chars_format::fixed);
    std::string out(buf.data(), res.ptr);
    if (out.find('.') == std::string::npos) {
        out += ".0";
    }
    return out;
}

std::string encode_frame(const GlucoseReading& reading) {
    validate(reading);
    std::string out = "CGM,";
    out += reading.device_id;
    out += ',';
    out += std::to_string(reading.seq);
    out += ',';
    out += format_rfc3339(reading.timestamp);
    out += ',';
    out += format_glucose(reading.glucose);
    return out;
}

namespace {

std::string_view strip_eol(std::string_view line) {
    if (!line.empty() && line.back() == '\n') {
        line.remove_suffix(1);
    }
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace

GlucoseReading parse_frame(std::string_view line) {
    line = strip_eol(line);
    const auto fields = split_commas(line);
    if (fields.size() != 5) {
        throw FrameError(FrameErrorKind::field_count, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0] != "CGM") {
        throw FrameError(FrameErrorKind::bad_prefix, "frame must start with 'CGM'");
    }
    GlucoseReading r;
    r.device_id = std::string(fields[1]);
    if (!valid_device_id(r.device_id)) {
        throw FrameError(FrameErrorKind::bad_device_id, "device id is empty or has control characters");
    }
    const auto seq_text = fields[2];
    const auto seq_res = std::from_chars(seq_text.data(), seq_text.data() + seq_text.size(), r.seq);
    if (seq_text.empty() || seq_res.ec != std::errc{} || seq_res.ptr != seq_text.data() + seq_text.size()) {
        throw FrameError(FrameErrorKind::bad_sequence, "'" + std::string(seq_text) + "' is not an unsigned integer");
    }
    const auto ts = parse_rfc3339(fields[3]);
    if (!ts) {
        throw FrameError(FrameErrorKind::bad_timestamp, "'" + std::string(fields[3]) + "' is not RFC3339 UTC");
    }
    r.timestamp = *ts;
    const auto g_text = fields[4];
    const auto g_res = std::from_chars(g_text.data(), g_text.data() + g_text.size(), r.glucose);
    if (g_text.empty() || g_res.ec != std::errc{} || g_res.ptr != g_text.data() + g_text.size() ||
        !std::isfinite(r.glucose)) {
        throw FrameError(FrameErrorKind::bad_number, "'" + std::string(g_text) + "' is not a decimal number");
    }
    if (r.glucose < kMinGlucose || r.glucose > kMaxGlucose) {
        throw FrameError(FrameErrorKind::out_of_range, std::string(g_text) + " mg/dl outside [20, 600]");
    }
    return r;
}

std::string encode_ack(std::uint64_t seq) {
    return "OK," + std::to_string(seq);
}

std::string encode_nack(std::string_view reason) {
    std::string clean(reason);
    for (char& c : clean) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return "ERR," + clean;
}

std::optional<Ack> parse_ack(std::string_view line) {
    line = strip_eol(line);
    if (line.starts_with("OK,")) {
        Ack a;
        a.ok = true;
        const auto text = line.substr(3);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), a.seq);
        if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            return std::nullopt;
        }
        return a;
    }
    if (line.starts_with("ERR,")) {
        return Ack{false, 0, std::string(line.substr(4))};
    }
    return std::nullopt;
}

} // namespace cgft::cgm
