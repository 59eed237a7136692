#include "cgft/cgm/reading_store.hpp"

#include "cgft/cgm/wire.hpp"

#include <algorithm>

namespace cgft::cgm {

ReadingStore::ReadingStore(Sink sink) : sink_(std::move(sink)) {}

ReadingStore::Shard& ReadingStore::shard_for(const std::string& device_id) {
    {
        std::shared_lock lock(shards_mutex_);
        if (auto it = shards_.find(device_id); it != shards_.end()) {
            return *it->second;
        }
    }
    std::unique_lock lock(shards_mutex_);
    auto& slot = shards_[device_id];
    if (!slot) {
        slot = std::make_unique<Shard>();
    }
    return *slot;
}

const ReadingStore::Shard* ReadingStore::find_shard(const std::string& device_id) const {
    std::shared_lock lock(shards_mutex_);
    auto it = shards_.find(device_id);
    return it == shards_.end() ? nullptr : it->second.get();
}

IngestResult ReadingStore::ingest(const GlucoseReading& reading) {
    validate(reading);
    Shard& shard = shard_for(reading.device_id);
    std::lock_guard lock(shard.mutex);
    if (shard.by_seq.contains(reading.seq)) {
        return IngestResult::duplicate;
    }
    if (sink_) {
        sink_(reading);
    }
    shard.by_seq.emplace(reading.seq, reading);
    return IngestResult::stored;
}

std::vector<GlucoseReading> ReadingStore::query(const std::string& device_id, Timestamp from, Timestamp to) const {
    std::vector<GlucoseReading> out;
    const Shard* shard = find_shard(device_id);
    if (!shard) {
        return out;
    }
    {
        std::lock_guard lock(shard->mutex);
        for (const auto& [seq, r] : shard->by_seq) {
            if (r.timestamp >= from && r.timestamp <= to) {
                out.push_back(r);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GlucoseReading& a, const GlucoseReading& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::vector<GlucoseReading> ReadingStore::all(const std::string& device_id) const {
    return query(device_id, Timestamp::min(), Timestamp::max());
}

std::optional<GlucoseReading> ReadingStore::latest(const std::string& device_id) const {
    const Shard* shard = find_shard(device_id);
    if (!shard) {
        return std::nullopt;
    }
    std::lock_guard lock(shard->mutex);
    if (shard->by_seq.empty()) {
        return std::nullopt;
    }
    return shard->by_seq.rbegin()->second;
}

std::size_t ReadingStore::size() const {
    std::shared_lock lock(shards_mutex_);
    std::size_t n = 0;
    for (const auto& [id, shard] : shards_) {
        std::lock_guard shard_lock(shard->mutex);
        n += shard->by_seq.size();
    }
    return n;
}

std::vector<std::string> ReadingStore::devices() const {
    std::shared_lock lock(shards_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, shard] : shards_) {
        out.push_back(id);
    }
    return out;
}

} // namespace cgft::cgm
