#include "cgft/experiment/config.hpp"

#include "cgft/common/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cgft::experiment {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
    if constexpr (std::is_unsigned_v<T>) {
        if (j.at(key).is_number_integer() && j.at(key).get<long long>() < 0) {
            throw ConfigError(where + "." + key + " must not be negative");
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const std::string& where) {
    if (!j.is_string()) {
        throw ConfigError(where + " must be a path string");
    }
    std::filesystem::path p = j.get<std::string>();
    return p.is_relative() && !base.empty() ? base / p : p;
}

dataset::SynthConfig parse_synthetic(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "complementary") {
            throw ConfigError("data.synthetic preset must be \"complementary\"");
        }
        return dataset::complementary_fixture();
    }
    const std::string where = "data.synthetic";
    check_keys(j, where,
               {"n_models", "n_classes", "dims", "samples_per_class", "confusable", "noise_stddev", "center_spread",
                "confusable_offset", "seed"});
    dataset::SynthConfig c;
    read(j, "n_models", c.n_models, where);
    read(j, "n_classes", c.n_classes, where);
    c.dims.assign(c.n_models, 16);
    read(j, "dims", c.dims, where);
    read(j, "samples_per_class", c.samples_per_class, where);
    read(j, "confusable", c.confusable, where);
    read(j, "noise_stddev", c.noise_stddev, where);
    read(j, "center_spread", c.center_spread, where);
    read(j, "confusable_offset", c.confusable_offset, where);
    read(j, "seed", c.seed, where);
    return c;
}

void parse_optimizer(const json& j, const std::string& where, fusion::OptimizerConfig& c) {
    check_keys(j, where,
               {"population", "iterations", "inertia", "cognitive", "social", "velocity_clamp", "tournament_size",
                "crossover_probability", "blend_alpha", "mutation_stddev", "mutation_probability", "elite_count"});
    read(j, "population", c.population, where);
    read(j, "iterations", c.iterations, where);
    read(j, "inertia", c.pso.inertia, where);
    read(j, "cognitive", c.pso.cognitive, where);
    read(j, "social", c.pso.social, where);
    read(j, "velocity_clamp", c.pso.velocity_clamp, where);
    read(j, "tournament_size", c.ga.tournament_size, where);
    read(j, "crossover_probability", c.ga.crossover_probability, where);
    read(j, "blend_alpha", c.ga.blend_alpha, where);
    read(j, "mutation_stddev", c.ga.mutation_stddev, where);
    read(j, "mutation_probability", c.ga.mutation_probability, where);
    read(j, "elite_count", c.ga.elite_count, where);
}

} // namespace

void ExperimentConfig::validate() const {
    if (synthetic.has_value() == files.has_value()) {
        throw ConfigError("data must name either synthetic data or feature files");
    }
    if (synthetic) {
        synthetic->validate();
    }
    if (files && files->features.empty()) {
        throw ConfigError("data.features must list at least one feature file");
    }
    const double sum = splits.train + splits.validation + splits.test;
    if (!(splits.train > 0 && splits.validation > 0 && splits.test > 0) || std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("splits must be positive and sum to 1");
    }
    if (!(classifier.lambda > 0) || classifier.epochs == 0) {
        throw ConfigError("classifier.lambda must be positive and classifier.epochs at least 1");
    }
    pso.validate();
    ga.validate();
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config", {"seed", "data", "splits", "classifier", "optimizers", "output"});

    ExperimentConfig c;
    read(j, "seed", c.seed, "config");
    c.classifier.seed = c.seed;
    c.pso = fusion::OptimizerConfig::pso_defaults(c.seed);
    c.ga = fusion::OptimizerConfig::ga_defaults(c.seed);

    if (!j.contains("data")) {
        throw ConfigError("config needs a data section");
    }
    const auto& data = j.at("data");
    check_keys(data, "data", {"synthetic", "features", "manifest", "labels"});
    if (data.contains("synthetic")) {
        if (data.contains("features") || data.contains("manifest") || data.contains("labels")) {
            throw ConfigError("data.synthetic cannot be combined with feature files");
        }
        c.synthetic = parse_synthetic(data.at("synthetic"));
    } else {
        if (!data.contains("features") || !data.at("features").is_array() || !data.contains("manifest")) {
            throw ConfigError("data needs a features array and a manifest");
        }
        FileData files;
        for (const auto& f : data.at("features")) {
            files.features.push_back(resolve(base_dir, f, "data.features[]"));
        }
        files.manifest = resolve(base_dir, data.at("manifest"), "data.manifest");
        if (data.contains("labels")) {
            files.labels = resolve(base_dir, data.at("labels"), "data.labels");
        }
        c.files = std::move(files);
    }

    if (j.contains("splits")) {
        const auto& s = j.at("splits");
        check_keys(s, "splits", {"train", "validation", "test"});
        read(s, "train", c.splits.train, "splits");
        read(s, "validation", c.splits.validation, "splits");
        read(s, "test", c.splits.test, "splits");
    }
    if (j.contains("classifier")) {
        const auto& s = j.at("classifier");
        check_keys(s, "classifier", {"lambda", "epochs"});
        read(s, "lambda", c.classifier.lambda, "classifier");
        read(s, "epochs", c.classifier.epochs, "classifier");
    }
    if (j.contains("optimizers")) {
        const auto& s = j.at("optimizers");
        check_keys(s, "optimizers", {"pso", "ga"});
        if (s.contains("pso")) {
            parse_optimizer(s.at("pso"), "optimizers.pso", c.pso);
        }
        if (s.contains("ga")) {
            parse_optimizer(s.at("ga"), "optimizers.ga", c.ga);
        }
    }
    if (j.contains("output")) {
        const auto& s = j.at("output");
        check_keys(s, "output", {"dir"});
        if (s.contains("dir")) {
            c.output_dir = resolve(base_dir, s.at("dir"), "output.dir");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

} // namespace cgft::experiment
