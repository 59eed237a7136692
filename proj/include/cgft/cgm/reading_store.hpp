#pragma once

#include "cgft/cgm/reading.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace cgft::cgm {

enum class IngestResult { stored, duplicate };

/// Glucose readings keyed by (device_id, seq). Writes to one device are
/// serialized; different devices ingest independently.
class ReadingStore {
  public:
    /// Called with each new reading before it becomes visible. A StorageError
    /// thrown here aborts the ingest and leaves the store unchanged.
    using Sink = std::function<void(const GlucoseReading&)>;

    explicit ReadingStore(Sink sink = {});

    ReadingStore(const ReadingStore&) = delete;
    ReadingStore& operator=(const ReadingStore&) = delete;

    /// Idempotent on (device_id, seq): a replayed frame is reported as a
    /// duplicate and changes nothing. Throws InvalidArgument for invalid
    /// readings and StorageError when the sink fails.
    IngestResult ingest(const GlucoseReading& reading);

    /// Readings of one device with timestamp in [from, to], ordered by time.
    [[nodiscard]] std::vector<GlucoseReading> query(const std::string& device_id, Timestamp from, Timestamp to) const;

    [[nodiscard]] std::vector<GlucoseReading> all(const std::string& device_id) const;
    [[nodiscard]] std::optional<GlucoseReading> latest(const std::string& device_id) const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<std::string> devices() const;

  private:
    struct Shard {
        mutable std::mutex mutex;
        std::map<std::uint64_t, GlucoseReading> by_seq;
    };

    Shard& shard_for(const std::string& device_id);
    const Shard* find_shard(const std::string& device_id) const;

    Sink sink_;
    mutable std::shared_mutex shards_mutex_;
    std::map<std::string, std::unique_ptr<Shard>> shards_;
};

} // namespace cgft::cgm
