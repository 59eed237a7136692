#pragma once

#include "cgft/cgm/reading.hpp"

#include <deque>
#include <vector>

namespace cgft::cgm {

/// On-sensor ring buffer: eight hours of 15-minute samples.
class SensorBuffer {
  public:
    static constexpr std::size_t kCapacity = 32;

    /// Evicts the oldest reading when full. Throws InvalidArgument unless
    /// reading.seq is greater than the newest buffered seq.
    void push(GlucoseReading reading);

    [[nodiscard]] std::size_t size() const noexcept { return readings_.size(); }
    [[nodiscard]] bool empty() const noexcept { return readings_.empty(); }
    [[nodiscard]] const GlucoseReading& newest() const { return readings_.back(); }
    [[nodiscard]] const GlucoseReading& oldest() const { return readings_.front(); }
    [[nodiscard]] std::vector<GlucoseReading> snapshot() const { return {readings_.begin(), readings_.end()}; }

  private:
    std::deque<GlucoseReading> readings_;
};

} // namespace cgft::cgm
