#pragma once

#include "cgft/cgm/reading_store.hpp"
#include "cgft/recognizer/recognizer.hpp"
#include "cgft/tracker/alerts.hpp"
#include "cgft/tracker/journal.hpp"
#include "cgft/tracker/types.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace cgft::tracker {

struct TrackerOptions {
    std::filesystem::path data_dir; ///< empty keeps everything in memory
    AlertPolicy alerts;
};

enum class EventType { reading, meal, alert };

std::string to_string(EventType type);

/// Pushed to subscribers after the change it describes is committed.
struct Event {
    EventType type = EventType::reading;
    std::string patient_id;
    nlohmann::json data;
};

/// Invoked synchronously, in commit order, while the service holds its write
/// lock. Must be quick and must not call back into the service.
using EventCallback = std::function<void(const Event&)>;

/// A meal is described either by per-model feature vectors or by an image
/// reference resolved through the feature extractor.
struct MealInput {
    std::optional<recognizer::ModelFeatures> features;
    std::optional<std::string> image_ref;
};

struct IngestOutcome {
    cgm::IngestResult result = cgm::IngestResult::stored;
    std::optional<std::string> patient_id; ///< owner of the device, if linked
    std::vector<Alert> alerts;
};

/// Patients, readings, meals and alerts, persisted as append-only logs and
/// rebuilt by replay on construction.
///
/// Writes are serialized by one reader-writer lock; queries share it. Alerts
/// are evaluated inside reading ingestion, so an alert is visible no later
/// than the reading that caused it. Derived data (alerts and their ids) is
/// never logged; replay re-derives it from the same record order.
class Tracker {
  public:
    /// Throws StorageError when the logs cannot be read and DataError when a
    /// stored bundle is corrupt.
    explicit Tracker(TrackerOptions options = {});

    Tracker(const Tracker&) = delete;
    Tracker& operator=(const Tracker&) = delete;

    [[nodiscard]] const TrackerOptions& options() const noexcept { return options_; }

    /// Validates the bundle, stores a copy in the training store and serves
    /// it from now on.
    void deploy(recognizer::ModelBundle bundle);
    [[nodiscard]] std::shared_ptr<const recognizer::Recognizer> recognizer() const;
    void set_extractor(std::shared_ptr<recognizer::FeatureExtractor> extractor);

    /// patient_id must be 1-64 characters of [A-Za-z0-9_.-]. A device_id in
    /// the profile is linked as part of creation. Throws InvalidArgument or
    /// Conflict (duplicate id, device already linked).
    PatientProfile create_patient(PatientProfile profile);
    [[nodiscard]] PatientProfile get_patient(const std::string& patient_id) const;
    [[nodiscard]] std::vector<PatientProfile> patients() const;

    /// Readings the device sent before the link become part of the patient's
    /// timeline; they raise no alerts retroactively. Throws NotFound or
    /// Conflict (device linked elsewhere, patient already has a device).
    PatientProfile link_device(const std::string& patient_id, const std::string& device_id);

    /// Idempotent on (device_id, seq). Throws InvalidArgument or StorageError.
    IngestOutcome ingest(const cgm::GlucoseReading& reading);

    /// Throws NotFound (patient), InvalidArgument (shape), Unavailable (no
    /// recognizer or extractor) or StorageError.
    MealEvent submit_meal(const std::string& patient_id, const MealInput& input, Timestamp timestamp);

    /// `chosen` must be in the disambiguation list or equal the predicted
    /// name. Confirming the current value again changes nothing.
    MealEvent confirm_meal_category(const std::string& meal_id, const std::string& chosen);
    [[nodiscard]] MealEvent get_meal(const std::string& meal_id) const;

    /// Readings and meals with timestamps in [from, to]. Throws NotFound or
    /// InvalidArgument when from > to.
    [[nodiscard]] Timeline get_timeline(const std::string& patient_id, Timestamp from, Timestamp to) const;

    /// In creation order, optionally only those addressed to `role`.
    [[nodiscard]] std::vector<Alert> alerts(const std::string& patient_id, std::optional<Role> role = {}) const;

    /// Latest reading classified against the last meal before it.
    [[nodiscard]] PatientState state(const std::string& patient_id) const;

    std::uint64_t subscribe(std::string patient_id, EventCallback callback);
    void unsubscribe(std::uint64_t subscription);

  private:
    struct PatientData {
        PatientProfile profile;
        std::multimap<Timestamp, std::string> meals; ///< timestamp -> meal_id, insertion order within ties
        std::vector<Alert> alerts;
        AlertGate gate;
    };

    void replay();
    void apply_patient(const PatientProfile& profile);
    void apply_link(const std::string& patient_id, const std::string& device_id);
    IngestOutcome apply_reading(const cgm::GlucoseReading& reading);
    void apply_meal(const MealEvent& meal);
    void apply_confirm(const std::string& meal_id, const std::string& category);
    void check_link(const PatientData* patient, const std::string& device_id) const;

    PatientData& patient(const std::string& patient_id);
    const PatientData& patient(const std::string& patient_id) const;
    std::optional<Timestamp> last_meal_before(const PatientData& p, Timestamp t) const;
    void emit(EventType type, const std::string& patient_id, const nlohmann::json& data);

    TrackerOptions options_;
    mutable std::shared_mutex mutex_;
    Journal journal_;
    bool replaying_ = false;
    cgm::ReadingStore readings_;
    std::map<std::string, PatientData> patients_;
    std::map<std::string, std::string> device_owner_;
    std::map<std::string, MealEvent> meals_;
    std::uint64_t next_meal_ = 1;
    std::uint64_t next_alert_ = 1;
    std::shared_ptr<const recognizer::Recognizer> recognizer_;
    std::shared_ptr<recognizer::FeatureExtractor> extractor_;

    std::mutex subscribers_mutex_;
    std::map<std::uint64_t, std::pair<std::string, EventCallback>> subscribers_;
    std::uint64_t next_subscription_ = 1;
};

} // namespace cgft::tracker
