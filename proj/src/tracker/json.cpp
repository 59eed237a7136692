#include "cgft/tracker/json.hpp"

#include "cgft/common/error.hpp"

namespace cgft::cgm {

void to_json(nlohmann::json& j, const GlucoseReading& r) {
    j = nlohmann::json{{"device_id", r.device_id},
                       {"seq", r.seq},
                       {"timestamp", format_rfc3339(r.timestamp)},
                       {"glucose", r.glucose}};
}

void from_json(const nlohmann::json& j, GlucoseReading& r) {
    try {
        j.at("device_id").get_to(r.device_id);
        j.at("seq").get_to(r.seq);
        r.timestamp = parse_rfc3339_or_throw(j.at("timestamp").get<std::string>(), "timestamp");
        j.at("glucose").get_to(r.glucose);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed reading: ") + e.what());
    }
}

} // namespace cgft::cgm

namespace cgft::tracker {

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

template <typename F>
void guarded(const char* what, F&& f) {
    try {
        f();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed ") + what + ": " + e.what());
    }
}

} // namespace

void to_json(nlohmann::json& j, const GlucoseState& s) {
    j = nlohmann::json{{"context", to_string(s.context)}, {"band", to_string(s.band)}};
}

void from_json(const nlohmann::json& j, GlucoseState& s) {
    guarded("glucose state", [&] {
        s.context = parse_meal_context(j.at("context").get<std::string>());
        s.band = parse_glucose_band(j.at("band").get<std::string>());
    });
}

void to_json(nlohmann::json& j, const PatientProfile& p) {
    j = nlohmann::json{{"patient_id", p.patient_id},
                       {"display_name", p.display_name},
                       {"diabetic_status", to_string(p.status)},
                       {"device_id", optional_json(p.device_id)},
                       {"doctor_contacts", p.doctor_contacts},
                       {"family_contacts", p.family_contacts}};
}

void from_json(const nlohmann::json& j, PatientProfile& p) {
    guarded("patient profile", [&] {
        p = PatientProfile{};
        j.at("patient_id").get_to(p.patient_id);
        p.display_name = j.value("display_name", std::string{});
        p.status = parse_diabetic_status(j.value("diabetic_status", std::string{"non-diabetic"}));
        p.device_id = optional_field<std::string>(j, "device_id");
        p.doctor_contacts = j.value("doctor_contacts", std::vector<std::string>{});
        p.family_contacts = j.value("family_contacts", std::vector<std::string>{});
    });
}

void to_json(nlohmann::json& j, const MealEvent& m) {
    j = nlohmann::json{{"meal_id", m.meal_id},
                       {"patient_id", m.patient_id},
                       {"timestamp", format_rfc3339(m.timestamp)},
                       {"predicted_category", m.predicted_category},
                       {"confidence", m.confidence},
                       {"disambiguation", m.disambiguation},
                       {"confirmed_category", optional_json(m.confirmed_category)},
                       {"image_ref", optional_json(m.image_ref)},
                       {"category", m.category()}};
}

void from_json(const nlohmann::json& j, MealEvent& m) {
    guarded("meal event", [&] {
        m = MealEvent{};
        j.at("meal_id").get_to(m.meal_id);
        j.at("patient_id").get_to(m.patient_id);
        m.timestamp = parse_rfc3339_or_throw(j.at("timestamp").get<std::string>(), "timestamp");
        j.at("predicted_category").get_to(m.predicted_category);
        j.at("confidence").get_to(m.confidence);
        j.at("disambiguation").get_to(m.disambiguation);
        m.confirmed_category = optional_field<std::string>(j, "confirmed_category");
        m.image_ref = optional_field<std::string>(j, "image_ref");
    });
}

void to_json(nlohmann::json& j, const Alert& a) {
    std::vector<std::string> recipients;
    for (auto r : a.recipients) {
        recipients.push_back(to_string(r));
    }
    j = nlohmann::json{{"alert_id", a.alert_id},
                       {"patient_id", a.patient_id},
                       {"severity", to_string(a.severity)},
                       {"reading", a.reading},
                       {"created_at", format_rfc3339(a.created_at)},
                       {"state", a.state},
                       {"recipients", recipients},
                       {"recommendations", a.recommendations}};
}

void from_json(const nlohmann::json& j, Alert& a) {
    guarded("alert", [&] {
        a = Alert{};
        j.at("alert_id").get_to(a.alert_id);
        j.at("patient_id").get_to(a.patient_id);
        a.severity = parse_severity(j.at("severity").get<std::string>());
        j.at("reading").get_to(a.reading);
        a.created_at = parse_rfc3339_or_throw(j.at("created_at").get<std::string>(), "created_at");
        j.at("state").get_to(a.state);
        for (const auto& r : j.at("recipients")) {
            a.recipients.push_back(parse_role(r.get<std::string>()));
        }
        j.at("recommendations").get_to(a.recommendations);
    });
}

void to_json(nlohmann::json& j, const Timeline& t) {
    j = nlohmann::json{{"readings", t.readings}, {"meals", t.meals}};
}

void to_json(nlohmann::json& j, const PatientState& s) {
    j = nlohmann::json{{"reading", optional_json(s.reading)},
                       {"state", optional_json(s.state)},
                       {"last_meal", s.last_meal ? nlohmann::json(format_rfc3339(*s.last_meal)) : nlohmann::json(nullptr)}};
}

} // namespace cgft::tracker
