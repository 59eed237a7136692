#include "cgft/cgm/line_transport.hpp"
#include "cgft/cgm/reading_store.hpp"
#include "cgft/cgm/relay.hpp"
#include "cgft/cgm/sensor_buffer.hpp"
#include "cgft/cgm/simulator.hpp"
#include "cgft/cgm/wire.hpp"
#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <thread>

using namespace cgft;
using namespace cgft::cgm;
using namespace std::chrono_literals;

namespace {

Timestamp t0() {
    return *parse_rfc3339("2024-01-01T00:00:00Z");
}

GlucoseReading reading(std::string dev, std::uint64_t seq, double g = 120.0) {
    return {std::move(dev), seq, t0() + kSamplePeriod * static_cast<long>(seq), g};
}

} // namespace

TEST_SUITE("timestamps") {
    TEST_CASE("RFC3339 format and strict parse") {
        CHECK(format_rfc3339(t0()) == "2024-01-01T00:00:00Z");
        CHECK(format_rfc3339(t0() + 25h + 61s) == "2024-01-02T01:01:01Z");
        CHECK_FALSE(parse_rfc3339("2024-02-30T00:00:00Z"));
        CHECK_FALSE(parse_rfc3339("2024-01-01T00:00:00"));
        CHECK_FALSE(parse_rfc3339("2024-01-01 00:00:00Z"));
        CHECK_FALSE(parse_rfc3339("1969-12-31T23:59:59Z"));
        CHECK(parse_rfc3339("2024-02-29T23:59:59Z"));
    }
}

TEST_SUITE("wire frames") {
    TEST_CASE("documented example encodes bit-exactly") {
        CHECK(encode_frame({"S1", 7, t0(), 142.0}) == "CGM,S1,7,2024-01-01T00:00:00Z,142.0");
        CHECK(encode_frame({"S1", 8, t0(), 99.5}) == "CGM,S1,8,2024-01-01T00:00:00Z,99.5");
    }

    TEST_CASE("parse accepts the example with and without newline") {
        const GlucoseReading expected{"S1", 7, t0(), 142.0};
        CHECK(parse_frame("CGM,S1,7,2024-01-01T00:00:00Z,142.0") == expected);
        CHECK(parse_frame("CGM,S1,7,2024-01-01T00:00:00Z,142.0\n") == expected);
        CHECK(parse_frame("CGM,S1,7,2024-01-01T00:00:00Z,142.0\r\n") == expected);
    }

    TEST_CASE("property: parse(encode(r)) == r") {
        Rng rng(1234);
        const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_.:";
        for (int i = 0; i < 2000; ++i) {
            GlucoseReading r;
            const std::size_t len = 1 + rng.index(12);
            for (std::size_t k = 0; k < len; ++k) {
                r.device_id += alphabet[rng.index(alphabet.size())];
            }
            r.seq = static_cast<std::uint64_t>(rng.uniform() * 1e15);
            r.timestamp = Timestamp{std::chrono::seconds{static_cast<long>(rng.uniform() * 4e9)}};
            r.glucose = rng.uniform(kMinGlucose, kMaxGlucose);
            REQUIRE(parse_frame(encode_frame(r)) == r);
        }
    }

    TEST_CASE("malformed lines are rejected with typed errors") {
        const std::map<std::string, FrameErrorKind> corpus{
            {"CGM,S1,7,2024-01-01T00:00:00Z", FrameErrorKind::field_count},
            {"CGM,S1,7,2024-01-01T00:00:00Z,142.0,extra", FrameErrorKind::field_count},
            {"", FrameErrorKind::field_count},
            {"BGM,S1,7,2024-01-01T00:00:00Z,142.0", FrameErrorKind::bad_prefix},
            {"CGM,,7,2024-01-01T00:00:00Z,142.0", FrameErrorKind::bad_device_id},
            {"CGM,S1,-7,2024-01-01T00:00:00Z,142.0", FrameErrorKind::bad_sequence},
            {"CGM,S1,7x,2024-01-01T00:00:00Z,142.0", FrameErrorKind::bad_sequence},
            {"CGM,S1,7,2024-13-01T00:00:00Z,142.0", FrameErrorKind::bad_timestamp},
            {"CGM,S1,7,yesterday,142.0", FrameErrorKind::bad_timestamp},
            {"CGM,S1,7,2024-01-01T00:00:00Z,abc", FrameErrorKind::bad_number},
            {"CGM,S1,7,2024-01-01T00:00:00Z,142.0mg", FrameErrorKind::bad_number},
            {"CGM,S1,7,2024-01-01T00:00:00Z,nan", FrameErrorKind::bad_number},
            {"CGM,S1,7,2024-01-01T00:00:00Z,", FrameErrorKind::bad_number},
            {"CGM,S1,7,2024-01-01T00:00:00Z,9999", FrameErrorKind::out_of_range},
            {"CGM,S1,7,2024-01-01T00:00:00Z,19.9", FrameErrorKind::out_of_range},
        };
        for (const auto& [line, kind] : corpus) {
            try {
                parse_frame(line);
                FAIL("accepted: " << line);
            } catch (const FrameError& e) {
                CHECK_MESSAGE(e.kind() == kind, line);
            }
        }
    }

    TEST_CASE("acks") {
        CHECK(encode_ack(7) == "OK,7");
        CHECK(encode_nack("out-of-range") == "ERR,out-of-range");
        CHECK(parse_ack("OK,7\n")->seq == 7);
        CHECK_FALSE(parse_ack("ERR,bad-number")->ok);
        CHECK_FALSE(parse_ack("HELLO"));
    }
}

TEST_SUITE("sensor buffer") {
    TEST_CASE("33 pushes keep the last 32") {
        SensorBuffer b;
        for (std::uint64_t s = 0; s < 33; ++s) {
            b.push(reading("S1", s));
        }
        CHECK(b.size() == 32);
        CHECK(b.oldest().seq == 1);
        CHECK(b.newest().seq == 32);
    }

    TEST_CASE("push onto empty") {
        SensorBuffer b;
        b.push(reading("S1", 0));
        CHECK(b.size() == 1);
    }

    TEST_CASE("non-monotonic seq is rejected") {
        SensorBuffer b;
        b.push(reading("S1", 7));
        CHECK_THROWS_AS(b.push(reading("S1", 5)), InvalidArgument);
        CHECK_THROWS_AS(b.push(reading("S1", 7)), InvalidArgument);
        CHECK(b.size() == 1);
    }

    TEST_CASE("property: after k >= 32 pushes exactly the last 32 remain") {
        for (std::uint64_t k = 32; k < 100; k += 7) {
            SensorBuffer b;
            for (std::uint64_t s = 0; s < k; ++s) {
                b.push(reading("S1", s));
                REQUIRE(b.size() <= SensorBuffer::kCapacity);
            }
            const auto snap = b.snapshot();
            for (std::size_t i = 0; i < 32; ++i) {
                CHECK(snap[i].seq == k - 32 + i);
            }
        }
    }
}

TEST_SUITE("simulator") {
    TEST_CASE("10 hours give 40 readings with seq 0..39") {
        SensorProfile p;
        p.start = t0();
        const auto rs = simulate_sensor(p, 10h);
        REQUIRE(rs.size() == 40);
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(rs[i].seq == i);
            CHECK(rs[i].timestamp == t0() + 15min * static_cast<long>(i));
        }
    }

    TEST_CASE("no noise and no meals give the baseline") {
        SensorProfile p;
        p.baseline = 105.0;
        for (const auto& r : simulate_sensor(p, 5h)) {
            CHECK(r.glucose == 105.0);
        }
    }

    TEST_CASE("one meal peaks at least half the amplitude above baseline within two hours") {
        // Oracle: the response is A*t/30 on [0,30] and A*2^-(t-30)/90 after, so
        // on a 15-minute grid some sample falls in [15, 45] minutes after the
        // meal, where the curve is at least min(A/2, A*2^(-1/6)) = A/2.
        for (int meal_minute = 0; meal_minute < 60; meal_minute += 5) {
            SensorProfile p;
            p.start = t0();
            p.meal_amplitude = 80.0;
            p.meal_offsets = {std::chrono::minutes{60 + meal_minute}};
            const auto rs = simulate_sensor(p, 6h);
            double peak = 0.0;
            for (const auto& r : rs) {
                const auto since = r.timestamp - (t0() + p.meal_offsets[0]);
                if (since >= 0s && since <= 2h) {
                    peak = std::max(peak, r.glucose);
                }
            }
            CHECK(peak - p.baseline >= 0.5 * p.meal_amplitude - 0.05);
        }
        SensorProfile p;
        CHECK(meal_response(p, 30min) == doctest::Approx(p.meal_amplitude));
        CHECK(meal_response(p, 120min) == doctest::Approx(p.meal_amplitude / 2.0));
        CHECK(meal_response(p, -1min) == 0.0);
    }

    TEST_CASE("noise is deterministic given the seed and clamped") {
        SensorProfile p;
        p.noise_stddev = 400.0;
        const auto a = simulate_sensor(p, 4h);
        CHECK(a == simulate_sensor(p, 4h));
        for (const auto& r : a) {
            CHECK(r.glucose >= kMinGlucose);
            CHECK(r.glucose <= kMaxGlucose);
        }
    }

    TEST_CASE("profile validation") {
        SensorProfile p;
        p.baseline = 40.0;
        CHECK_THROWS_AS(SensorSimulator{p}, InvalidArgument);
        p = SensorProfile{};
        p.meal_amplitude = -1.0;
        CHECK_THROWS_AS(SensorSimulator{p}, InvalidArgument);
    }
}

TEST_SUITE("relay") {
    TEST_CASE("three ticks in one sampling window share one seq") {
        SensorProfile p;
        p.start = t0();
        Relay relay(p);
        std::vector<std::uint64_t> seqs;
        for (int i = 0; i < 3; ++i) {
            const auto frames = relay.tick();
            REQUIRE(frames.size() == 1);
            seqs.push_back(parse_frame(frames[0]).seq);
        }
        CHECK(seqs == std::vector<std::uint64_t>{0, 0, 0});
        CHECK(parse_frame(relay.tick()[0]).seq == 1);
    }

    TEST_CASE("empty buffer gives no frame") {
        CHECK_FALSE(relay_tick(SensorBuffer{}, t0()));
    }

    TEST_CASE("a reading newer than now is not sent") {
        SensorBuffer b;
        b.push(reading("S1", 0));
        b.push(reading("S1", 1));
        CHECK(parse_frame(*relay_tick(b, t0() + 5min)).seq == 0);
        CHECK(parse_frame(*relay_tick(b, t0() + 15min)).seq == 1);
    }

    TEST_CASE("backlog replay sends the buffered history once") {
        SensorProfile p;
        p.start = t0();
        Relay relay(p, {.warmup = 10h, .backlog_replay = true});
        const auto first = relay.tick();
        CHECK(first.size() == 32);
        CHECK(parse_frame(first.front()).seq == 9);
        CHECK(parse_frame(first.back()).seq == 40);
        CHECK(relay.tick().size() == 1);

        Relay live(p, {.warmup = 10h});
        CHECK(live.tick().size() == 1);
    }
}

TEST_SUITE("reading store") {
    TEST_CASE("ingesting a frame twice is a duplicate") {
        ReadingStore store;
        const auto r = parse_frame("CGM,S1,7,2024-01-01T00:00:00Z,142.0");
        CHECK(store.ingest(r) == IngestResult::stored);
        CHECK(store.ingest(r) == IngestResult::duplicate);
        CHECK(store.size() == 1);
    }

    TEST_CASE("40 readings come back in order over the full span") {
        ReadingStore store;
        SensorProfile p;
        p.start = t0();
        p.noise_stddev = 5.0;
        const auto rs = simulate_sensor(p, 10h);
        for (auto it = rs.rbegin(); it != rs.rend(); ++it) {
            store.ingest(*it);
        }
        CHECK(store.query("S1", t0(), t0() + 10h) == rs);
        CHECK(store.query("S1", t0() + 15min, t0() + 30min).size() == 2);
    }

    TEST_CASE("interleaved devices stay separate") {
        ReadingStore store;
        for (std::uint64_t s = 0; s < 10; ++s) {
            store.ingest(reading("A", s, 100.0));
            store.ingest(reading("B", s, 200.0));
        }
        const auto a = store.all("A");
        const auto b = store.all("B");
        REQUIRE(a.size() == 10);
        REQUIRE(b.size() == 10);
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(a[i].device_id == "A");
            CHECK(a[i].seq == i);
            CHECK(b[i].glucose == 200.0);
        }
    }

    TEST_CASE("sink failure leaves the store unchanged and is retryable") {
        bool fail = true;
        ReadingStore store([&](const GlucoseReading&) {
            if (fail) {
                throw StorageError("disk full");
            }
        });
        try {
            store.ingest(reading("S1", 0));
            FAIL("expected StorageError");
        } catch (const StorageError& e) {
            CHECK(e.retryable());
        }
        CHECK(store.size() == 0);
        fail = false;
        CHECK(store.ingest(reading("S1", 0)) == IngestResult::stored);
    }

    TEST_CASE("property: replaying a relay log with resends stores one reading per seq") {
        SensorProfile p;
        p.start = t0();
        p.noise_stddev = 3.0;
        Relay relay(p);
        std::vector<std::string> log;
        for (int i = 0; i < 120; ++i) {
            for (auto& f : relay.tick()) {
                log.push_back(f);
            }
        }
        ReadingStore once;
        ReadingStore twice;
        std::map<std::uint64_t, int> frames_per_seq;
        for (const auto& f : log) {
            const auto r = parse_frame(f);
            ++frames_per_seq[r.seq];
            once.ingest(r);
            twice.ingest(r);
        }
        for (const auto& f : log) {
            twice.ingest(parse_frame(f));
        }
        for (const auto& [seq, count] : frames_per_seq) {
            CHECK(count <= 3);
        }
        CHECK(once.size() == frames_per_seq.size());
        CHECK(once.all("S1") == twice.all("S1"));
    }

    TEST_CASE("concurrent devices ingest safely") {
        ReadingStore store;
        std::vector<std::thread> threads;
        for (int d = 0; d < 4; ++d) {
            threads.emplace_back([&store, d] {
                for (std::uint64_t s = 0; s < 200; ++s) {
                    store.ingest(reading("D" + std::to_string(d), s));
                    store.ingest(reading("D" + std::to_string(d), s));
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        CHECK(store.size() == 800);
    }
}

TEST_SUITE("line transport") {
    TEST_CASE("frames over TCP are acknowledged and stored once") {
        ReadingStore store;
        LineServer server("127.0.0.1", 0, make_ingest_handler([&](const GlucoseReading& r) { return store.ingest(r); }));
        server.start();
        {
            LineClient client("127.0.0.1", server.port());
            CHECK(client.request("CGM,S1,7,2024-01-01T00:00:00Z,142.0") == "OK,7");
            CHECK(client.request("CGM,S1,7,2024-01-01T00:00:00Z,142.0") == "OK,7");
            CHECK(client.request("CGM,S1,8,2024-01-01T00:15:00Z,9999") == "ERR,out-of-range");
            CHECK(client.request("garbage") == "ERR,field-count");
        }
        server.stop();
        CHECK(store.size() == 1);
    }
}
