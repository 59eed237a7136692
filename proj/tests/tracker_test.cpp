#include "fixtures.hpp"

#include "cgft/cgm/relay.hpp"
#include "cgft/cgm/simulator.hpp"
#include "cgft/cgm/wire.hpp"
#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"
#include "cgft/tracker/json.hpp"
#include "cgft/tracker/tracker.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace cgft;
using namespace cgft::tracker;
using namespace std::chrono_literals;
using cgm::GlucoseReading;

namespace {

Timestamp t0() {
    return *parse_rfc3339("2024-01-01T00:00:00Z");
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cgft-tracker-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

const test::MealFixture& fixture() {
    static const auto fx = test::make_meal_fixture();
    return fx;
}

const recognizer::ModelBundle& bundle() {
    static const auto b = fixture().bundle();
    return b;
}

/// A held-out sample the deployed recognizer classifies correctly, from the
/// merged group or from a plain class.
std::size_t correctly_classified(bool merged) {
    const auto& fx = fixture();
    const recognizer::Recognizer rec(bundle());
    for (auto i : fx.test) {
        const auto p = rec.predict(fx.sample(i));
        if (p.merged_class == fx.merged_labels[i] && fx.label_map.is_group(p.merged_class) == merged) {
            return i;
        }
    }
    FAIL("no suitable sample");
    return 0;
}

PatientProfile alice() {
    PatientProfile p;
    p.patient_id = "alice";
    p.display_name = "Alice";
    p.status = DiabeticStatus::pre_diabetic;
    p.doctor_contacts = {"dr-hassan"};
    p.family_contacts = {"sam"};
    return p;
}

GlucoseReading at(std::uint64_t seq, double glucose, Timestamp base = t0()) {
    return {"S1", seq, base + 15min * static_cast<long>(seq), glucose};
}

} // namespace

TEST_SUITE("glucose state") {
    TEST_CASE("documented examples") {
        CHECK(classify_band(MealContext::fasting, 90) == GlucoseBand::non_diabetic);
        CHECK(classify_band(MealContext::fasting, 130) == GlucoseBand::diabetic);
        CHECK(classify_band(MealContext::two_hours_after, 150) == GlucoseBand::pre_diabetic);
        CHECK(classify_band(MealContext::after_eating, 250) == GlucoseBand::diabetic);
    }

    TEST_CASE("boundary probes") {
        using enum GlucoseBand;
        const struct {
            MealContext ctx;
            double value;
            GlucoseBand band;
        } probes[] = {
            {MealContext::fasting, 100, non_diabetic},         {MealContext::fasting, 101, pre_diabetic},
            {MealContext::fasting, 125, pre_diabetic},         {MealContext::fasting, 126, diabetic},
            {MealContext::after_eating, 189, non_diabetic},    {MealContext::after_eating, 190, pre_diabetic},
            {MealContext::after_eating, 219, pre_diabetic},    {MealContext::after_eating, 220, diabetic},
            {MealContext::two_hours_after, 139, non_diabetic}, {MealContext::two_hours_after, 140, pre_diabetic},
            {MealContext::two_hours_after, 199, pre_diabetic}, {MealContext::two_hours_after, 200, diabetic},
        };
        for (const auto& p : probes) {
            CHECK_MESSAGE(classify_band(p.ctx, p.value) == p.band, to_string(p.ctx), " ", p.value);
        }
        CHECK(classify_band(MealContext::unclassified, 126) == GlucoseBand::diabetic);
    }

    TEST_CASE("property: bands partition [20, 600] monotonically in every context") {
        for (auto ctx : {MealContext::fasting, MealContext::after_eating, MealContext::two_hours_after,
                         MealContext::unclassified}) {
            int prev = 0;
            for (int tenth = 200; tenth <= 6000; ++tenth) {
                const int band = static_cast<int>(classify_band(ctx, tenth / 10.0));
                REQUIRE(band >= prev);
                prev = band;
            }
            CHECK(prev == static_cast<int>(GlucoseBand::diabetic));
        }
    }

    TEST_CASE("out-of-range values are rejected") {
        CHECK_THROWS_AS(classify_band(MealContext::fasting, 19.9), InvalidArgument);
        CHECK_THROWS_AS(classify_band(MealContext::fasting, 600.1), InvalidArgument);
        CHECK_THROWS_AS(classify_glucose_state(std::nan(""), std::nullopt, t0()), InvalidArgument);
        CHECK_NOTHROW(classify_band(MealContext::fasting, 20));
        CHECK_NOTHROW(classify_band(MealContext::fasting, 600));
    }

    TEST_CASE("meal context windows") {
        const auto meal = t0();
        CHECK(meal_context(std::nullopt, t0()) == MealContext::fasting);
        CHECK(meal_context(meal, meal) == MealContext::unclassified);
        CHECK(meal_context(meal, meal + 1s) == MealContext::after_eating);
        CHECK(meal_context(meal, meal + 2h) == MealContext::after_eating);
        CHECK(meal_context(meal, meal + 2h + 1s) == MealContext::two_hours_after);
        CHECK(meal_context(meal, meal + 4h) == MealContext::two_hours_after);
        CHECK(meal_context(meal, meal + 4h + 1s) == MealContext::unclassified);
        CHECK(meal_context(meal, meal + 8h - 1s) == MealContext::unclassified);
        CHECK(meal_context(meal, meal + 8h) == MealContext::fasting);
    }

    TEST_CASE("threshold validation") {
        StateThresholds t;
        t.fasting = {130, 126};
        CHECK_THROWS_AS(t.validate(), ConfigError);
    }
}

TEST_SUITE("alert gate") {
    const GlucoseState fasting_state(double v) {
        return classify_glucose_state(v, std::nullopt, t0());
    }

    TEST_CASE("fasting 120, 130, 128, 115, 131 raises two high alerts") {
        AlertGate gate;
        const AlertPolicy policy;
        std::vector<double> fired;
        for (double v : {120.0, 130.0, 128.0, 115.0, 131.0}) {
            if (auto d = gate.evaluate(v, fasting_state(v), policy)) {
                CHECK(d->severity == Severity::high);
                CHECK(d->recipients == std::vector<Role>{Role::patient});
                CHECK(d->recommendations == std::vector<std::string>{kActivityAdvice});
                fired.push_back(v);
            }
        }
        CHECK(fired == std::vector<double>{130.0, 131.0});
    }

    TEST_CASE("305 raises one very-high alert for patient, doctor and family") {
        AlertGate gate;
        const auto d = gate.evaluate(305, fasting_state(305), {});
        REQUIRE(d);
        CHECK(d->severity == Severity::very_high);
        CHECK(d->recipients == std::vector<Role>{Role::patient, Role::doctor, Role::family});
        CHECK_FALSE(gate.evaluate(310, fasting_state(310), {}));
        CHECK_FALSE(gate.evaluate(250, fasting_state(250), {}));
        CHECK_FALSE(gate.evaluate(291, fasting_state(291), {}));
        CHECK_FALSE(gate.evaluate(290, fasting_state(290), {}));
        CHECK(gate.evaluate(300, fasting_state(300), {})->severity == Severity::very_high);
    }

    TEST_CASE("fasting 95 raises nothing") {
        AlertGate gate;
        CHECK_FALSE(gate.evaluate(95, fasting_state(95), {}));
    }

    TEST_CASE("meal-adjacent high alert adds the low-carbohydrate advice") {
        AlertGate gate;
        const auto state = classify_glucose_state(230, t0(), t0() + 1h);
        const auto d = gate.evaluate(230, state, {});
        REQUIRE(d);
        CHECK(d->recommendations == std::vector<std::string>{kActivityAdvice, kLowCarbAdvice});
    }

    TEST_CASE("property: same-severity alerts are separated by a reading at least 10 below the trigger") {
        Rng rng(99);
        const AlertPolicy policy;
        for (int trial = 0; trial < 200; ++trial) {
            AlertGate gate;
            std::optional<double> last_high;
            std::optional<double> last_very_high;
            double min_since_high = 1e9;
            double min_since_very_high = 1e9;
            double v = rng.uniform(80, 320);
            for (int i = 0; i < 200; ++i) {
                v = std::clamp(v + rng.normal(0, 15), 20.0, 600.0);
                const auto state = fasting_state(v);
                min_since_high = std::min(min_since_high, v);
                min_since_very_high = std::min(min_since_very_high, v);
                if (auto d = gate.evaluate(v, state, policy)) {
                    auto& last = d->severity == Severity::high ? last_high : last_very_high;
                    auto& min_since = d->severity == Severity::high ? min_since_high : min_since_very_high;
                    if (last) {
                        REQUIRE(min_since <= *last - policy.hysteresis);
                    }
                    last = d->threshold;
                    min_since = 1e9;
                }
            }
        }
    }
}

TEST_SUITE("tracker") {
    TEST_CASE("create then fetch returns the same profile") {
        Tracker t;
        const auto p = t.create_patient(alice());
        CHECK(t.get_patient("alice") == alice());
        CHECK(p == alice());
        CHECK_THROWS_AS(t.create_patient(alice()), Conflict);
        CHECK_THROWS_AS(t.get_patient("bob"), NotFound);
        auto bad = alice();
        bad.patient_id = "a/b";
        CHECK_THROWS_AS(t.create_patient(bad), InvalidArgument);
    }

    TEST_CASE("a device links to at most one patient") {
        Tracker t;
        t.create_patient(alice());
        auto bob = alice();
        bob.patient_id = "bob";
        t.create_patient(bob);
        t.link_device("alice", "S1");
        CHECK_NOTHROW(t.link_device("alice", "S1"));
        CHECK_THROWS_AS(t.link_device("bob", "S1"), Conflict);
        CHECK_THROWS_AS(t.link_device("alice", "S2"), Conflict);
        CHECK_THROWS_AS(t.link_device("carol", "S3"), NotFound);
    }

    TEST_CASE("readings before linking are attached on link without retroactive alerts") {
        const auto dir = temp_dir("prelink");
        {
            Tracker t({.data_dir = dir});
            t.create_patient(alice());
            for (std::uint64_t s = 0; s < 4; ++s) {
                CHECK_FALSE(t.ingest(at(s, 200)).patient_id);
            }
            t.link_device("alice", "S1");
            CHECK(t.get_timeline("alice", t0(), t0() + 1h).readings.size() == 4);
            CHECK(t.alerts("alice").empty());
            CHECK(t.ingest(at(4, 200)).alerts.size() == 1);
        }
        Tracker replayed({.data_dir = dir});
        CHECK(replayed.get_timeline("alice", t0(), t0() + 2h).readings.size() == 5);
        CHECK(replayed.alerts("alice").size() == 1);
    }

    TEST_CASE("meal submission") {
        const auto& fx = fixture();
        Tracker t;
        t.create_patient(alice());

        SUBCASE("without a deployed recognizer") {
            CHECK_THROWS_AS(t.submit_meal("alice", {.features = fx.sample(0)}, t0()), recognizer::Unavailable);
        }
        t.deploy(bundle());
        SUBCASE("unknown patient") {
            CHECK_THROWS_AS(t.submit_meal("bob", {.features = fx.sample(0)}, t0()), NotFound);
        }
        SUBCASE("dimension mismatch") {
            auto f = fx.sample(0);
            f[0].push_back(1.0);
            CHECK_THROWS_AS(t.submit_meal("alice", {.features = f}, t0()), InvalidArgument);
        }
        SUBCASE("image reference without extractor") {
            CHECK_THROWS_AS(t.submit_meal("alice", {.image_ref = "x.jpg"}, t0()), recognizer::Unavailable);
        }
        SUBCASE("plain class") {
            const auto i = correctly_classified(false);
            const auto meal = t.submit_meal("alice", {.features = fx.sample(i)}, t0());
            const auto expected = fx.label_map.merged_names[fx.merged_labels[i]];
            CHECK(meal.predicted_category == expected);
            CHECK(meal.confidence > 1.0 / static_cast<double>(fx.label_map.n_merged()));
            CHECK(meal.disambiguation == std::vector<std::string>{expected});
            CHECK(meal.category() == expected);
            CHECK(meal.meal_id == "m1");
        }
        SUBCASE("merged class and confirmation") {
            const auto meal = t.submit_meal("alice", {.features = fx.sample(correctly_classified(true))}, t0());
            CHECK(meal.predicted_category == "mandi/kabsa");
            CHECK(meal.disambiguation == std::vector<std::string>{"mandi", "kabsa"});
            const auto confirmed = t.confirm_meal_category(meal.meal_id, "mandi");
            CHECK(confirmed.confirmed_category == "mandi");
            CHECK(confirmed.category() == "mandi");
            CHECK(t.confirm_meal_category(meal.meal_id, "mandi") == confirmed);
            CHECK_THROWS_AS(t.confirm_meal_category(meal.meal_id, "pizza"), InvalidArgument);
            CHECK_THROWS_AS(t.confirm_meal_category("m99", "mandi"), NotFound);
            CHECK(t.get_timeline("alice", t0(), t0()).meals.at(0).category() == "mandi");
        }
    }

    TEST_CASE("timeline windows") {
        const auto& fx = fixture();
        Tracker t;
        t.create_patient(alice());
        t.deploy(bundle());
        CHECK(t.get_timeline("alice", t0(), t0() + 24h) == Timeline{});
        CHECK_THROWS_AS(t.get_timeline("bob", t0(), t0()), NotFound);
        CHECK_THROWS_AS(t.get_timeline("alice", t0() + 1s, t0()), InvalidArgument);

        t.submit_meal("alice", {.features = fx.sample(0)}, t0() + 1h);
        CHECK(t.get_timeline("alice", t0(), t0() + 1h).meals.size() == 1);
        CHECK(t.get_timeline("alice", t0() + 1h, t0() + 2h).meals.size() == 1);
        CHECK(t.get_timeline("alice", t0(), t0() + 1h - 1s).meals.empty());
    }

    TEST_CASE("property: adjacent windows compose") {
        const auto& fx = fixture();
        Tracker t;
        t.create_patient(alice());
        t.link_device("alice", "S1");
        t.deploy(bundle());
        cgm::SensorProfile profile;
        profile.start = t0();
        profile.noise_stddev = 4.0;
        profile.meal_offsets = {2h, 9h};
        for (const auto& r : cgm::simulate_sensor(profile, 12h)) {
            t.ingest(r);
        }
        Rng rng(5);
        for (int m = 0; m < 6; ++m) {
            const auto ts = t0() + std::chrono::seconds{static_cast<long>(rng.index(12 * 3600))};
            t.submit_meal("alice", {.features = fx.sample(fx.test[m])}, ts);
        }
        t.submit_meal("alice", {.features = fx.sample(fx.test[6])}, t0() + 3h);
        for (int trial = 0; trial < 100; ++trial) {
            auto a = t0() + std::chrono::seconds{static_cast<long>(rng.index(6 * 3600))};
            auto b = a + std::chrono::seconds{static_cast<long>(rng.index(6 * 3600))};
            if (trial == 0) {
                a = t0();
                b = t0() + 3h; // a meal and a reading sit exactly on the boundary
            }
            const auto c = b + std::chrono::seconds{static_cast<long>(rng.index(6 * 3600))};
            const auto left = t.get_timeline("alice", a, b);
            const auto right = t.get_timeline("alice", b + 1s, c);
            const auto whole = t.get_timeline("alice", a, c);
            auto readings = left.readings;
            readings.insert(readings.end(), right.readings.begin(), right.readings.end());
            auto meals = left.meals;
            meals.insert(meals.end(), right.meals.begin(), right.meals.end());
            REQUIRE(readings == whole.readings);
            REQUIRE(meals == whole.meals);
        }
    }

    TEST_CASE("alert scenario through ingestion") {
        Tracker t;
        auto p = alice();
        p.device_id = "S1";
        t.create_patient(p);
        const double values[] = {120, 130, 128, 115, 131};
        std::uint64_t seq = 0;
        for (double v : values) {
            t.ingest(at(seq++, v));
        }
        const auto high = t.alerts("alice");
        REQUIRE(high.size() == 2);
        CHECK(high[0].reading.glucose == 130);
        CHECK(high[1].reading.glucose == 131);
        CHECK(high[0].created_at == high[0].reading.timestamp);
        CHECK(t.alerts("alice", Role::doctor).empty());

        t.ingest(at(seq++, 305));
        const auto all = t.alerts("alice");
        REQUIRE(all.size() == 3);
        CHECK(all[2].severity == Severity::very_high);
        CHECK(t.alerts("alice", Role::doctor).size() == 1);
        CHECK(t.alerts("alice", Role::family).size() == 1);
        CHECK(t.state("alice").state->band == GlucoseBand::diabetic);
    }

    TEST_CASE("events reach subscribers in commit order") {
        Tracker t;
        auto p = alice();
        p.device_id = "S1";
        t.create_patient(p);
        std::vector<std::string> seen;
        const auto sub = t.subscribe("alice", [&](const Event& e) { seen.push_back(to_string(e.type)); });
        t.ingest(at(0, 100));
        t.ingest(at(1, 140));
        t.ingest(at(1, 140));
        CHECK(seen == std::vector<std::string>{"reading", "reading", "alert"});
        t.unsubscribe(sub);
        t.ingest(at(2, 100));
        CHECK(seen.size() == 3);
    }

    TEST_CASE("restart replays to identical state") {
        const auto& fx = fixture();
        const auto dir = temp_dir("replay");
        Timeline before;
        std::vector<Alert> alerts_before;
        PatientState state_before;
        {
            Tracker t({.data_dir = dir});
            t.create_patient(alice());
            t.deploy(bundle());
            cgm::SensorProfile profile;
            profile.start = t0();
            profile.noise_stddev = 6.0;
            profile.meal_amplitude = 150;
            profile.meal_offsets = {3h, 7h};
            const auto rs = cgm::simulate_sensor(profile, 10h);
            for (std::size_t i = 0; i < rs.size(); ++i) {
                if (i == 5) {
                    t.link_device("alice", "S1");
                }
                if (i == 12) {
                    t.submit_meal("alice", {.features = fx.sample(correctly_classified(true))}, t0() + 3h);
                }
                if (i == 30) {
                    t.confirm_meal_category("m1", "kabsa");
                    t.submit_meal("alice", {.features = fx.sample(fx.test[3])}, t0() + 7h);
                }
                t.ingest(rs[i]);
                t.ingest(rs[i]);
            }
            before = t.get_timeline("alice", t0(), t0() + 10h);
            alerts_before = t.alerts("alice");
            state_before = t.state("alice");
        }
        CHECK(before.readings.size() == 40);
        CHECK(before.meals.size() == 2);
        CHECK_FALSE(alerts_before.empty());

        CHECK(std::filesystem::exists(dir / "db1_readings" / "readings.log"));
        CHECK(std::filesystem::exists(dir / "db2_meals" / "meals.log"));
        CHECK(std::filesystem::exists(dir / "db3_training" / "bundle.json"));
        CHECK(std::filesystem::exists(dir / "patients.log"));

        {
            Tracker t({.data_dir = dir});
            CHECK(t.get_timeline("alice", t0(), t0() + 10h) == before);
            CHECK(t.alerts("alice") == alerts_before);
            CHECK(t.state("alice") == state_before);
            CHECK(t.recognizer() != nullptr);
            CHECK(t.recognizer()->bundle() == bundle());
            const auto next = t.submit_meal("alice", {.features = fx.sample(fx.test[4])}, t0() + 9h);
            CHECK(next.meal_id == "m3");
        }

        SUBCASE("a torn final record is dropped") {
            std::ofstream(dir / "db1_readings" / "readings.log", std::ios::app) << "{\"lsn\":99999,\"type\":\"rea";
            Tracker t({.data_dir = dir});
            CHECK(t.get_timeline("alice", t0(), t0() + 10h).readings == before.readings);
            t.ingest(at(40, 100));
            Tracker again({.data_dir = dir});
            CHECK(again.get_timeline("alice", t0(), t0() + 11h).readings.size() == 41);
        }
        SUBCASE("a corrupt record in the middle is reported") {
            const auto path = dir / "patients.log";
            std::ifstream in(path);
            std::string first;
            std::getline(in, first);
            std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            in.close();
            std::ofstream(path, std::ios::trunc) << "garbage\n" << rest;
            CHECK_THROWS_AS(Tracker({.data_dir = dir}), StorageError);
        }
    }

    TEST_CASE("json round trips") {
        MealEvent m;
        m.meal_id = "m1";
        m.patient_id = "alice";
        m.timestamp = t0();
        m.predicted_category = "mandi/kabsa";
        m.confidence = 0.1 + 0.2;
        m.disambiguation = {"mandi", "kabsa"};
        m.confirmed_category = "kabsa";
        const nlohmann::json j = m;
        CHECK(j.at("category") == "kabsa");
        CHECK(j.get<MealEvent>() == m);
        CHECK(nlohmann::json(alice()).get<PatientProfile>() == alice());
        CHECK_THROWS_AS(nlohmann::json::parse(R"({"display_name":"x"})").get<PatientProfile>(), InvalidArgument);
    }
}
