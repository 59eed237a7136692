#include "cgft/cgm/sensor_buffer.hpp"

#include "cgft/common/error.hpp"

namespace cgft::cgm {

void SensorBuffer::push(GlucoseReading reading) {
    if (!readings_.empty() && reading.seq <= readings_.back().seq) {
        throw InvalidArgument("sensor buffer: seq " + std::to_string(reading.seq) + " does not follow " +
                              std::to_string(readings_.back().seq));
    }
    if (readings_.size() == kCapacity) {
        readings_.pop_front();
    }
    readings_.push_back(std::move(reading));
}

} // namespace cgft::cgm
