#pragma once

#include "cgft/cgm/sensor_buffer.hpp"
#include "cgft/cgm/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cgft::cgm {

/// Frame for the newest buffered reading taken at or before `now`; nothing
/// when there is none. Ticks between samples resend the same seq and the
/// receiver deduplicates.
std::optional<std::string> relay_tick(const SensorBuffer& buffer, Timestamp now);

struct RelayOptions {
    /// How long the sensor runs before the relay first polls it.
    std::chrono::minutes warmup{0};
    /// On the first poll, also send every older reading still in the buffer.
    bool backlog_replay = false;
};

/// A sensor plus the NFC-to-Bluetooth relay polling it every 5 minutes.
class Relay {
  public:
    Relay(SensorProfile profile, RelayOptions options = {});

    /// Advances simulated time by one relay period (the first call polls at
    /// start + warmup) and returns the frames sent on that tick.
    std::vector<std::string> tick();

    [[nodiscard]] Timestamp now() const noexcept { return now_; }
    [[nodiscard]] const SensorBuffer& buffer() const noexcept { return buffer_; }

  private:
    void sample_until(Timestamp t);

    SensorSimulator sensor_;
    SensorBuffer buffer_;
    RelayOptions options_;
    Timestamp now_;
    bool first_ = true;
};

} // namespace cgft::cgm
