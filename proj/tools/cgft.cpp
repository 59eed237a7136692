// Command-line front end: synthetic data, experiments, bundle export, the
// tracker service and the sensor simulator.

#include "cgft/cgm/line_transport.hpp"
#include "cgft/cgm/relay.hpp"
#include "cgft/common/error.hpp"
#include "cgft/experiment/experiment.hpp"
#include "cgft/experiment/report.hpp"
#include "cgft/fusion/feature_io.hpp"
#include "cgft/tracker/http_api.hpp"
#include "cgft/tracker/tracker.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace cgft;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 1;

struct GenArgs {
    std::string out = "data";
    std::uint64_t seed = 42;
    std::size_t samples_per_class = 200;
    double noise = 1.0;
};

struct TrainArgs {
    std::string config;
    std::string out;
};

struct ExportArgs {
    std::string experiment;
    std::string method;
    std::string output = "bundle.json";
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    int ingest_port = 7070;
    std::string data_dir = "cgft-data";
    std::string bundle;
    std::string extractor;
    std::string static_dir;
    std::vector<std::string> tokens;
    double very_high = 300.0;
    double hysteresis = 10.0;
    std::vector<double> fasting{101.0, 126.0};
    std::vector<double> after_eating{190.0, 220.0};
    std::vector<double> two_hours_after{140.0, 200.0};
};

struct SimulateArgs {
    std::string device = "S1";
    std::string start = "2024-01-01T00:00:00Z";
    double hours = 10.0;
    double warmup_hours = 0.0;
    bool backlog = false;
    std::uint64_t seed = 1;
    double baseline = 100.0;
    double amplitude = 90.0;
    double noise = 2.0;
    std::vector<int> meals;
    std::string connect;
    int interval_ms = 0;
};

int run_gen(const GenArgs& a) {
    auto cfg = dataset::complementary_fixture();
    cfg.seed = a.seed;
    cfg.samples_per_class = a.samples_per_class;
    cfg.noise_stddev = a.noise;
    const auto data = dataset::generate_synthetic(cfg);
    const std::filesystem::path out = a.out;
    std::filesystem::create_directories(out);
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (const auto& f : data.features) {
        const auto name = f.model_id() + ".cgft";
        fusion::write_features(out / name, f);
        features.push_back(name);
    }
    dataset::write_manifest(out / "manifest.json", data.manifest);
    fusion::write_labels(out / "labels.cgftl", data.labels);
    const nlohmann::ordered_json config{
        {"seed", a.seed},
        {"data", {{"features", features}, {"manifest", "manifest.json"}, {"labels", "labels.cgftl"}}},
        {"output", {{"dir", "results"}}},
    };
    std::ofstream(out / "config.json") << config.dump(2) << "\n";
    fmt::print("wrote {} models x {} samples to {}\n", data.features.size(), data.labels.size(), out.string());
    return kExitOk;
}

int run_train(const TrainArgs& a) {
    auto config = experiment::load_config(a.config);
    if (!a.out.empty()) {
        config.output_dir = a.out;
    }
    const auto result = experiment::run_experiment(config);
    fmt::print("{}", experiment::format_report_table(result.report));
    if (config.output_dir) {
        experiment::write_outputs(result, *config.output_dir);
        fmt::print("\nwrote report.txt, report.json and experiment.json to {}\n", config.output_dir->string());
    }
    return kExitOk;
}

int run_export(const ExportArgs& a) {
    recognizer::FusionMethod method;
    try {
        method = recognizer::parse_fusion_method(a.method);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const auto artifacts = experiment::load_artifacts(a.experiment);
    recognizer::write_bundle(a.output, artifacts.bundle(method));
    fmt::print("wrote {} bundle to {}\n", a.method, a.output);
    return kExitOk;
}

tracker::BandBounds bounds(const std::vector<double>& v, const char* name) {
    if (v.size() != 2) {
        throw ConfigError(fmt::format("--{} takes two values: pre-diabetic and diabetic lower bounds", name));
    }
    return {v[0], v[1]};
}

std::map<std::string, tracker::Role> parse_tokens(const std::vector<std::string>& specs) {
    std::map<std::string, tracker::Role> tokens;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--token expects TOKEN=ROLE, got '" + spec + "'");
        }
        try {
            tokens[spec.substr(0, eq)] = tracker::parse_role(spec.substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    return tokens;
}

int run_serve(const ServeArgs& a) {
    tracker::TrackerOptions options;
    options.data_dir = a.data_dir;
    options.alerts.very_high = a.very_high;
    options.alerts.hysteresis = a.hysteresis;
    options.alerts.bands.fasting = bounds(a.fasting, "fasting");
    options.alerts.bands.after_eating = bounds(a.after_eating, "after-eating");
    options.alerts.bands.two_hours_after = bounds(a.two_hours_after, "two-hours-after");
    options.alerts.validate();

    tracker::HttpOptions http;
    http.tokens = parse_tokens(a.tokens);
    http.static_dir = a.static_dir;

    // Block termination signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    tracker::Tracker service(options);
    if (!a.bundle.empty()) {
        service.deploy(recognizer::load_bundle(a.bundle));
        spdlog::info("deployed bundle {}", a.bundle);
    } else if (!service.recognizer()) {
        spdlog::warn("no recognizer bundle deployed; meal submission will answer 503");
    }
    if (!a.extractor.empty()) {
        service.set_extractor(std::make_shared<recognizer::SidecarExtractor>(
            a.extractor, std::filesystem::path(a.data_dir) / "extractor-work"));
    }

    tracker::HttpApi api(service, http);
    const int port = api.bind(a.host, a.port);
    api.start();
    spdlog::info("HTTP API on {}:{}, data in {}", a.host, port, a.data_dir);

    std::unique_ptr<cgm::LineServer> ingest;
    if (a.ingest_port >= 0) {
        ingest = std::make_unique<cgm::LineServer>(
            a.host, static_cast<std::uint16_t>(a.ingest_port),
            cgm::make_ingest_handler([&service](const cgm::GlucoseReading& r) { return service.ingest(r).result; }));
        ingest->start();
        spdlog::info("frame ingest on {}:{}", a.host, ingest->port());
    }

    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    if (ingest) {
        ingest->stop();
    }
    api.stop();
    return kExitOk;
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        throw ConfigError("--connect expects HOST:PORT");
    }
    int port = 0;
    try {
        port = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        port = -1;
    }
    if (port <= 0 || port > 65535) {
        throw ConfigError("--connect has an invalid port");
    }
    return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int run_simulate(const SimulateArgs& a) {
    cgm::SensorProfile profile;
    profile.device_id = a.device;
    const auto start = parse_rfc3339(a.start);
    if (!start) {
        throw ConfigError("--start must be an RFC3339 UTC timestamp");
    }
    profile.start = *start;
    profile.baseline = a.baseline;
    profile.meal_amplitude = a.amplitude;
    profile.noise_stddev = a.noise;
    profile.seed = a.seed;
    for (int m : a.meals) {
        profile.meal_offsets.emplace_back(m);
    }
    try {
        profile.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    cgm::RelayOptions relay_options;
    relay_options.warmup = std::chrono::minutes(static_cast<long>(a.warmup_hours * 60));
    relay_options.backlog_replay = a.backlog;
    cgm::Relay relay(profile, relay_options);

    std::unique_ptr<cgm::LineClient> client;
    if (!a.connect.empty()) {
        const auto [host, port] = split_host_port(a.connect);
        client = std::make_unique<cgm::LineClient>(host, port);
    }
    const auto ticks = static_cast<long>(a.hours * 60 / 5);
    for (long t = 0; t < ticks; ++t) {
        for (const auto& frame : relay.tick()) {
            if (client) {
                fmt::print("{} -> {}\n", frame, client->request(frame));
            } else {
                fmt::print("{}\n", frame);
            }
        }
        std::fflush(stdout);
        if (a.interval_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(a.interval_ms));
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meal recognition fusion experiments and CGM meal tracking"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->envname("CGFT_LOG_LEVEL");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write the synthetic complementary fixture as feature files");
    gen_cmd->add_option("-o,--out", gen.out, "Output directory")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--samples-per-class", gen.samples_per_class)->capture_default_str()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--noise", gen.noise, "Within-class standard deviation")->capture_default_str();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train-eval", "Train per-model classifiers and compare the fusion methods");
    train_cmd->add_option("-c,--config", train.config, "Experiment config (JSON)")->required()->envname("CGFT_CONFIG");
    train_cmd->add_option("-o,--out", train.out, "Output directory, overrides output.dir");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Export a recognizer bundle from experiment output");
    export_cmd->add_option("-e,--experiment", exp.experiment, "experiment.json written by train-eval")->required();
    export_cmd->add_option("-m,--method", exp.method, "pso, ga, equal or early")->required();
    export_cmd->add_option("-o,--output", exp.output, "Bundle path")->capture_default_str();

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the tracker service");
    serve_cmd->add_option("--host", serve.host, "Listen address")->capture_default_str()->envname("CGFT_HOST");
    serve_cmd->add_option("--port", serve.port, "HTTP port, 0 for any")->capture_default_str()->envname("CGFT_PORT");
    serve_cmd->add_option("--ingest-port", serve.ingest_port, "TCP frame ingest port, 0 for any, -1 to disable")
        ->capture_default_str()
        ->envname("CGFT_INGEST_PORT");
    serve_cmd->add_option("--data-dir", serve.data_dir, "Log directory")->capture_default_str()->envname("CGFT_DATA_DIR");
    serve_cmd->add_option("--bundle", serve.bundle, "Recognizer bundle to deploy")->envname("CGFT_BUNDLE");
    serve_cmd->add_option("--extractor", serve.extractor, "Feature extractor command for image references")
        ->envname("CGFT_EXTRACTOR");
    serve_cmd->add_option("--static-dir", serve.static_dir, "Directory served under /")->envname("CGFT_STATIC_DIR");
    serve_cmd->add_option("--token", serve.tokens, "TOKEN=ROLE (patient, doctor, family); repeatable")
        ->envname("CGFT_TOKENS")
        ->delimiter(',');
    serve_cmd->add_option("--very-high", serve.very_high, "Very-high alert threshold, mg/dl")
        ->capture_default_str()
        ->envname("CGFT_VERY_HIGH");
    serve_cmd->add_option("--hysteresis", serve.hysteresis, "Alert re-arm margin, mg/dl")
        ->capture_default_str()
        ->envname("CGFT_HYSTERESIS");
    serve_cmd->add_option("--fasting", serve.fasting, "Pre-diabetic and diabetic lower bounds")->expected(2);
    serve_cmd->add_option("--after-eating", serve.after_eating, "Pre-diabetic and diabetic lower bounds")->expected(2);
    serve_cmd->add_option("--two-hours-after", serve.two_hours_after, "Pre-diabetic and diabetic lower bounds")
        ->expected(2);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Emit relay frames from a simulated sensor");
    sim_cmd->add_option("--device", sim.device)->capture_default_str();
    sim_cmd->add_option("--start", sim.start, "Sensor start, RFC3339 UTC")->capture_default_str();
    sim_cmd->add_option("--hours", sim.hours, "Relay running time")->capture_default_str();
    sim_cmd->add_option("--warmup-hours", sim.warmup_hours, "Sensor time before the relay first polls")
        ->capture_default_str();
    sim_cmd->add_flag("--backlog", sim.backlog, "Send the buffered history on the first poll");
    sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
    sim_cmd->add_option("--baseline", sim.baseline, "Fasting level, mg/dl")->capture_default_str();
    sim_cmd->add_option("--amplitude", sim.amplitude, "Meal peak above baseline, mg/dl")->capture_default_str();
    sim_cmd->add_option("--noise", sim.noise, "Reading noise stddev, mg/dl")->capture_default_str();
    sim_cmd->add_option("--meal", sim.meals, "Meal time in minutes after start; repeatable");
    sim_cmd->add_option("--connect", sim.connect, "Send frames to HOST:PORT instead of stdout");
    sim_cmd->add_option("--interval-ms", sim.interval_ms, "Wall-clock pause between relay ticks")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_logger_mt("cgft"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*gen_cmd) {
            return run_gen(gen);
        }
        if (*train_cmd) {
            return run_train(train);
        }
        if (*export_cmd) {
            return run_export(exp);
        }
        if (*serve_cmd) {
            return run_serve(serve);
        }
        if (*sim_cmd) {
            return run_simulate(sim);
        }
    } catch (const ConfigError& e) {
        spdlog::error("config error: {}", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        spdlog::error("data error: {}", e.what());
        return kExitData;
    } catch (const NotFound& e) {
        spdlog::error("data error: {}", e.what());
        return kExitData;
    } catch (const InvalidArgument& e) {
        spdlog::error("data error: {}", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
