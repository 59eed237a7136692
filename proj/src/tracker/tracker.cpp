#include "cgft/tracker/tracker.hpp"

#include "cgft/common/error.hpp"
#include "cgft/tracker/json.hpp"

#include <algorithm>
#include <charconv>

namespace cgft::tracker {

namespace {

bool valid_patient_id(const std::string& id) {
    if (id.empty() || id.size() > 64) {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

std::uint64_t id_number(const std::string& id) {
    std::uint64_t n = 0;
    if (id.size() < 2) {
        return 0;
    }
    const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
    return ec == std::errc{} && ptr == id.data() + id.size() ? n : 0;
}

} // namespace

std::string to_string(DiabeticStatus status) {
    switch (status) {
    case DiabeticStatus::non_diabetic:
        return "non-diabetic";
    case DiabeticStatus::pre_diabetic:
        return "pre-diabetic";
    case DiabeticStatus::diabetic:
        return "diabetic";
    }
    return "?";
}

DiabeticStatus parse_diabetic_status(const std::string& text) {
    for (auto s : {DiabeticStatus::non_diabetic, DiabeticStatus::pre_diabetic, DiabeticStatus::diabetic}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw InvalidArgument("unknown diabetic status '" + text + "'");
}

std::string to_string(EventType type) {
    switch (type) {
    case EventType::reading:
        return "reading";
    case EventType::meal:
        return "meal";
    case EventType::alert:
        return "alert";
    }
    return "?";
}

Tracker::Tracker(TrackerOptions options)
    : options_(std::move(options)), journal_(options_.data_dir), readings_([this](const cgm::GlucoseReading& r) {
          if (!replaying_) {
              journal_.append(Journal::Store::readings, "reading", r);
          }
      }) {
    options_.alerts.validate();
    replay();
    if (journal_.persistent() && std::filesystem::exists(journal_.bundle_path())) {
        recognizer_ = std::make_shared<const recognizer::Recognizer>(recognizer::load_bundle(journal_.bundle_path()));
    }
}

void Tracker::replay() {
    replaying_ = true;
    try {
        for (const auto& rec : journal_.replay()) {
            if (rec.type == "patient") {
                apply_patient(rec.data.get<PatientProfile>());
            } else if (rec.type == "link") {
                apply_link(rec.data.at("patient_id").get<std::string>(), rec.data.at("device_id").get<std::string>());
            } else if (rec.type == "reading") {
                apply_reading(rec.data.get<cgm::GlucoseReading>());
            } else if (rec.type == "meal") {
                apply_meal(rec.data.get<MealEvent>());
            } else if (rec.type == "confirm") {
                apply_confirm(rec.data.at("meal_id").get<std::string>(), rec.data.at("category").get<std::string>());
            } else {
                throw StorageError("unknown journal record type '" + rec.type + "' at lsn " + std::to_string(rec.lsn));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        replaying_ = false;
        throw StorageError(std::string("unreadable journal record: ") + e.what());
    } catch (const StorageError&) {
        replaying_ = false;
        throw;
    } catch (const Error& e) {
        replaying_ = false;
        throw StorageError(std::string("inconsistent journal: ") + e.what());
    }
    replaying_ = false;
}

void Tracker::deploy(recognizer::ModelBundle bundle) {
    auto rec = std::make_shared<const recognizer::Recognizer>(std::move(bundle));
    std::unique_lock lock(mutex_);
    if (journal_.persistent()) {
        const auto tmp = journal_.bundle_path().string() + ".tmp";
        try {
            recognizer::write_bundle(tmp, rec->bundle());
        } catch (const Error& e) {
            throw StorageError(e.what());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, journal_.bundle_path(), ec);
        if (ec) {
            throw StorageError("cannot install bundle: " + ec.message());
        }
    }
    recognizer_ = std::move(rec);
}

std::shared_ptr<const recognizer::Recognizer> Tracker::recognizer() const {
    std::shared_lock lock(mutex_);
    return recognizer_;
}

void Tracker::set_extractor(std::shared_ptr<recognizer::FeatureExtractor> extractor) {
    std::unique_lock lock(mutex_);
    extractor_ = std::move(extractor);
}

Tracker::PatientData& Tracker::patient(const std::string& patient_id) {
    const auto it = patients_.find(patient_id);
    if (it == patients_.end()) {
        throw NotFound("unknown patient '" + patient_id + "'");
    }
    return it->second;
}

const Tracker::PatientData& Tracker::patient(const std::string& patient_id) const {
    const auto it = patients_.find(patient_id);
    if (it == patients_.end()) {
        throw NotFound("unknown patient '" + patient_id + "'");
    }
    return it->second;
}

void Tracker::check_link(const PatientData* p, const std::string& device_id) const {
    if (!cgm::valid_device_id(device_id)) {
        throw InvalidArgument("invalid device id '" + device_id + "'");
    }
    const auto owner = device_owner_.find(device_id);
    if (owner != device_owner_.end()) {
        throw Conflict("device '" + device_id + "' is already linked to patient '" + owner->second + "'");
    }
    if (p && p->profile.device_id) {
        throw Conflict("patient '" + p->profile.patient_id + "' already has device '" + *p->profile.device_id + "'");
    }
}

PatientProfile Tracker::create_patient(PatientProfile profile) {
    if (!valid_patient_id(profile.patient_id)) {
        throw InvalidArgument("patient_id must be 1-64 characters of [A-Za-z0-9_.-]");
    }
    std::unique_lock lock(mutex_);
    if (patients_.count(profile.patient_id) != 0) {
        throw Conflict("patient '" + profile.patient_id + "' already exists");
    }
    if (profile.device_id) {
        check_link(nullptr, *profile.device_id);
    }
    journal_.append(Journal::Store::patients, "patient", profile);
    apply_patient(profile);
    return profile;
}

void Tracker::apply_patient(const PatientProfile& profile) {
    if (patients_.count(profile.patient_id) != 0) {
        throw Conflict("patient '" + profile.patient_id + "' already exists");
    }
    patients_[profile.patient_id].profile = profile;
    if (profile.device_id) {
        device_owner_[*profile.device_id] = profile.patient_id;
    }
}

PatientProfile Tracker::get_patient(const std::string& patient_id) const {
    std::shared_lock lock(mutex_);
    return patient(patient_id).profile;
}

std::vector<PatientProfile> Tracker::patients() const {
    std::shared_lock lock(mutex_);
    std::vector<PatientProfile> out;
    for (const auto& [id, p] : patients_) {
        out.push_back(p.profile);
    }
    return out;
}

PatientProfile Tracker::link_device(const std::string& patient_id, const std::string& device_id) {
    std::unique_lock lock(mutex_);
    auto& p = patient(patient_id);
    if (p.profile.device_id == device_id) {
        return p.profile;
    }
    check_link(&p, device_id);
    journal_.append(Journal::Store::patients, "link", {{"patient_id", patient_id}, {"device_id", device_id}});
    apply_link(patient_id, device_id);
    return p.profile;
}

void Tracker::apply_link(const std::string& patient_id, const std::string& device_id) {
    auto& p = patient(patient_id);
    check_link(&p, device_id);
    p.profile.device_id = device_id;
    device_owner_[device_id] = patient_id;
}

IngestOutcome Tracker::ingest(const cgm::GlucoseReading& reading) {
    std::unique_lock lock(mutex_);
    return apply_reading(reading);
}

IngestOutcome Tracker::apply_reading(const cgm::GlucoseReading& reading) {
    IngestOutcome out;
    out.result = readings_.ingest(reading);
    if (out.result == cgm::IngestResult::duplicate) {
        return out;
    }
    const auto owner = device_owner_.find(reading.device_id);
    if (owner == device_owner_.end()) {
        return out;
    }
    out.patient_id = owner->second;
    auto& p = patient(owner->second);
    emit(EventType::reading, p.profile.patient_id, reading);

    const auto& policy = options_.alerts;
    const auto state =
        classify_glucose_state(reading.glucose, last_meal_before(p, reading.timestamp), reading.timestamp, policy.bands);
    if (auto decision = p.gate.evaluate(reading.glucose, state, policy)) {
        Alert a;
        a.alert_id = "a" + std::to_string(next_alert_++);
        a.patient_id = p.profile.patient_id;
        a.severity = decision->severity;
        a.reading = reading;
        a.created_at = reading.timestamp;
        a.state = state;
        a.recipients = std::move(decision->recipients);
        a.recommendations = std::move(decision->recommendations);
        p.alerts.push_back(a);
        emit(EventType::alert, p.profile.patient_id, a);
        out.alerts.push_back(std::move(a));
    }
    return out;
}

std::optional<Timestamp> Tracker::last_meal_before(const PatientData& p, Timestamp t) const {
    auto it = p.meals.upper_bound(t);
    if (it == p.meals.begin()) {
        return std::nullopt;
    }
    return std::prev(it)->first;
}

MealEvent Tracker::submit_meal(const std::string& patient_id, const MealInput& input, Timestamp timestamp) {
    std::shared_ptr<const recognizer::Recognizer> rec;
    std::shared_ptr<recognizer::FeatureExtractor> extractor;
    {
        std::shared_lock lock(mutex_);
        (void)patient(patient_id);
        rec = recognizer_;
        extractor = extractor_;
    }
    if (input.features.has_value() == input.image_ref.has_value()) {
        throw InvalidArgument("a meal needs exactly one of feature vectors or an image reference");
    }
    if (!rec) {
        throw recognizer::Unavailable("no recognizer bundle is deployed");
    }
    recognizer::Prediction prediction;
    if (input.features) {
        prediction = rec->predict(*input.features);
    } else {
        if (!extractor) {
            throw recognizer::Unavailable("image references need a feature extractor, none is configured");
        }
        prediction = rec->predict(extractor->extract(*input.image_ref, rec->bundle().input_models));
    }

    MealEvent meal;
    meal.patient_id = patient_id;
    meal.timestamp = timestamp;
    meal.predicted_category = prediction.category;
    meal.confidence = prediction.confidence;
    meal.disambiguation = prediction.members.empty() ? std::vector<std::string>{prediction.category} : prediction.members;
    meal.image_ref = input.image_ref;

    std::unique_lock lock(mutex_);
    (void)patient(patient_id);
    meal.meal_id = "m" + std::to_string(next_meal_);
    journal_.append(Journal::Store::meals, "meal", meal);
    apply_meal(meal);
    return meal;
}

void Tracker::apply_meal(const MealEvent& meal) {
    auto& p = patient(meal.patient_id);
    if (meals_.count(meal.meal_id) != 0) {
        throw Conflict("meal '" + meal.meal_id + "' already exists");
    }
    meals_[meal.meal_id] = meal;
    p.meals.emplace(meal.timestamp, meal.meal_id);
    next_meal_ = std::max(next_meal_, id_number(meal.meal_id) + 1);
    emit(EventType::meal, meal.patient_id, meal);
}

MealEvent Tracker::confirm_meal_category(const std::string& meal_id, const std::string& chosen) {
    std::unique_lock lock(mutex_);
    const auto it = meals_.find(meal_id);
    if (it == meals_.end()) {
        throw NotFound("unknown meal '" + meal_id + "'");
    }
    const auto& meal = it->second;
    const auto& list = meal.disambiguation;
    if (chosen != meal.predicted_category && std::find(list.begin(), list.end(), chosen) == list.end()) {
        std::string options;
        for (const auto& name : list) {
            options += (options.empty() ? "" : ", ") + name;
        }
        throw InvalidArgument("category '" + chosen + "' is not among the choices for meal '" + meal_id + "': " +
                              options);
    }
    if (meal.confirmed_category == chosen) {
        return meal;
    }
    journal_.append(Journal::Store::meals, "confirm", {{"meal_id", meal_id}, {"category", chosen}});
    apply_confirm(meal_id, chosen);
    return it->second;
}

void Tracker::apply_confirm(const std::string& meal_id, const std::string& category) {
    const auto it = meals_.find(meal_id);
    if (it == meals_.end()) {
        throw NotFound("unknown meal '" + meal_id + "'");
    }
    it->second.confirmed_category = category;
    emit(EventType::meal, it->second.patient_id, it->second);
}

MealEvent Tracker::get_meal(const std::string& meal_id) const {
    std::shared_lock lock(mutex_);
    const auto it = meals_.find(meal_id);
    if (it == meals_.end()) {
        throw NotFound("unknown meal '" + meal_id + "'");
    }
    return it->second;
}

Timeline Tracker::get_timeline(const std::string& patient_id, Timestamp from, Timestamp to) const {
    if (from > to) {
        throw InvalidArgument("timeline window is empty: from is after to");
    }
    std::shared_lock lock(mutex_);
    const auto& p = patient(patient_id);
    Timeline t;
    if (p.profile.device_id) {
        t.readings = readings_.query(*p.profile.device_id, from, to);
    }
    for (auto it = p.meals.lower_bound(from); it != p.meals.end() && it->first <= to; ++it) {
        t.meals.push_back(meals_.at(it->second));
    }
    return t;
}

std::vector<Alert> Tracker::alerts(const std::string& patient_id, std::optional<Role> role) const {
    std::shared_lock lock(mutex_);
    const auto& p = patient(patient_id);
    if (!role) {
        return p.alerts;
    }
    std::vector<Alert> out;
    std::copy_if(p.alerts.begin(), p.alerts.end(), std::back_inserter(out),
                 [&](const Alert& a) { return a.visible_to(*role); });
    return out;
}

PatientState Tracker::state(const std::string& patient_id) const {
    std::shared_lock lock(mutex_);
    const auto& p = patient(patient_id);
    PatientState s;
    if (p.profile.device_id) {
        s.reading = readings_.latest(*p.profile.device_id);
    }
    if (s.reading) {
        s.last_meal = last_meal_before(p, s.reading->timestamp);
        s.state = classify_glucose_state(s.reading->glucose, s.last_meal, s.reading->timestamp, options_.alerts.bands);
    } else if (!p.meals.empty()) {
        s.last_meal = p.meals.rbegin()->first;
    }
    return s;
}

std::uint64_t Tracker::subscribe(std::string patient_id, EventCallback callback) {
    std::lock_guard lock(subscribers_mutex_);
    const auto id = next_subscription_++;
    subscribers_.emplace(id, std::make_pair(std::move(patient_id), std::move(callback)));
    return id;
}

void Tracker::unsubscribe(std::uint64_t subscription) {
    std::lock_guard lock(subscribers_mutex_);
    subscribers_.erase(subscription);
}

void Tracker::emit(EventType type, const std::string& patient_id, const nlohmann::json& data) {
    if (replaying_) {
        return;
    }
    std::lock_guard lock(subscribers_mutex_);
    if (subscribers_.empty()) {
        return;
    }
    const Event event{type, patient_id, data};
    for (const auto& [id, sub] : subscribers_) {
        if (sub.first == patient_id) {
            sub.second(event);
        }
    }
}

} // namespace cgft::tracker
