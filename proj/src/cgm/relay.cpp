#include "cgft/cgm/relay.hpp"

#include "cgft/cgm/wire.hpp"

namespace cgft::cgm {

std::optional<std::string> relay_tick(const SensorBuffer& buffer, Timestamp now) {
    const auto readings = buffer.snapshot();
    for (auto it = readings.rbegin(); it != readings.rend(); ++it) {
        if (it->timestamp <= now) {
            return encode_frame(*it);
        }
    }
    return std::nullopt;
}

Relay::Relay(SensorProfile profile, RelayOptions options)
    : sensor_(std::move(profile)), options_(options), now_(sensor_.profile().start + options.warmup) {}

void Relay::sample_until(Timestamp t) {
    while (sensor_.next_time() <= t) {
        buffer_.push(sensor_.next());
    }
}

std::vector<std::string> Relay::tick() {
    if (!first_) {
        now_ += kRelayPeriod;
    }
    sample_until(now_);
    std::vector<std::string> frames;
    if (first_ && options_.backlog_replay) {
        for (const auto& r : buffer_.snapshot()) {
            if (r.seq != buffer_.newest().seq) {
                frames.push_back(encode_frame(r));
            }
        }
    }
    first_ = false;
    if (auto frame = relay_tick(buffer_, now_)) {
        frames.push_back(std::move(*frame));
    }
    return frames;
}

} // namespace cgft::cgm
