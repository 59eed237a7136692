#include "cgft/recognizer/model_bundle.hpp"

#include "cgft/common/error.hpp"

#include <nlohmann/json.hpp>

#include <fmt/format.h>

#include <fstream>
#include <numeric>
#include <sstream>

namespace cgft::recognizer {

using nlohmann::ordered_json;

std::string to_string(FusionMethod method) {
    switch (method) {
    case FusionMethod::pso:
        return "pso";
    case FusionMethod::ga:
        return "ga";
    case FusionMethod::equal:
        return "equal";
    case FusionMethod::early:
        return "early";
    }
    return "?";
}

FusionMethod parse_fusion_method(const std::string& text) {
    for (auto m : {FusionMethod::pso, FusionMethod::ga, FusionMethod::equal, FusionMethod::early}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw InvalidArgument("unknown fusion method '" + text + "' (expected pso, ga, equal or early)");
}

std::size_t ModelBundle::total_dims() const noexcept {
    return std::accumulate(input_dims.begin(), input_dims.end(), std::size_t{0});
}

void ModelBundle::validate() const {
    if (input_models.empty() || input_models.size() != input_dims.size()) {
        throw DataError("bundle: input_models and input_dims must be non-empty and of equal length");
    }
    labels.validate();
    const std::size_t expected_classifiers = method == FusionMethod::early ? 1 : input_models.size();
    if (classifiers.size() != expected_classifiers) {
        throw DataError(fmt::format("bundle: expected {} classifiers, found {}", expected_classifiers,
                                    classifiers.size()));
    }
    if (weights.size() != expected_classifiers) {
        throw DataError(fmt::format("bundle: expected {} weights, found {}", expected_classifiers, weights.size()));
    }
    if (!weights.any_positive()) {
        throw DataError("bundle: fusion weights are all zero");
    }
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        const auto& c = classifiers[i];
        c.validate();
        const std::size_t dims = method == FusionMethod::early ? total_dims() : input_dims[i];
        if (c.n_dims != dims) {
            throw DataError(fmt::format("bundle: classifier {} expects {} dims, input provides {}", i, c.n_dims, dims));
        }
        if (c.n_classes != labels.n_merged()) {
            throw DataError(fmt::format("bundle: classifier {} has {} classes, label map has {}", i, c.n_classes,
                                        labels.n_merged()));
        }
    }
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

ordered_json classifier_to_json(const fusion::ClassifierModel& c) {
    return ordered_json{{"model_id", c.model_id}, {"n_classes", c.n_classes}, {"n_dims", c.n_dims},
                        {"mean", c.mean},         {"stddev", c.stddev},       {"weights", c.weights},
                        {"biases", c.biases}};
}

fusion::ClassifierModel classifier_from_json(const ordered_json& j) {
    fusion::ClassifierModel c;
    j.at("model_id").get_to(c.model_id);
    j.at("n_classes").get_to(c.n_classes);
    j.at("n_dims").get_to(c.n_dims);
    j.at("mean").get_to(c.mean);
    j.at("stddev").get_to(c.stddev);
    j.at("weights").get_to(c.weights);
    j.at("biases").get_to(c.biases);
    return c;
}

ordered_json payload_to_json(const ModelBundle& b) {
    ordered_json classifiers = ordered_json::array();
    for (const auto& c : b.classifiers) {
        classifiers.push_back(classifier_to_json(c));
    }
    return ordered_json{
        {"method", to_string(b.method)},
        {"input_models", b.input_models},
        {"input_dims", b.input_dims},
        {"weights", b.weights.values()},
        {"labels",
         {{"original_to_merged", b.labels.original_to_merged},
          {"merged_names", b.labels.merged_names},
          {"members", b.labels.members}}},
        {"classifiers", std::move(classifiers)},
    };
}

ModelBundle payload_from_json(const ordered_json& j) {
    ModelBundle b;
    b.method = parse_fusion_method(j.at("method").get<std::string>());
    j.at("input_models").get_to(b.input_models);
    j.at("input_dims").get_to(b.input_dims);
    b.weights = fusion::WeightVector(j.at("weights").get<std::vector<double>>());
    const auto& labels = j.at("labels");
    labels.at("original_to_merged").get_to(b.labels.original_to_merged);
    labels.at("merged_names").get_to(b.labels.merged_names);
    labels.at("members").get_to(b.labels.members);
    for (const auto& c : j.at("classifiers")) {
        b.classifiers.push_back(classifier_from_json(c));
    }
    return b;
}

} // namespace

std::string bundle_to_string(const ModelBundle& bundle) {
    bundle.validate();
    const auto payload = payload_to_json(bundle);
    const ordered_json doc{
        {"format_version", ModelBundle::kFormatVersion},
        {"checksum", fmt::format("{:016x}", fnv1a(payload.dump()))},
        {"payload", payload},
    };
    return doc.dump() + "\n";
}

ModelBundle parse_bundle(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bundle is not valid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != ModelBundle::kFormatVersion) {
            throw DataError(fmt::format("unsupported bundle format version {} (expected {})", version,
                                        ModelBundle::kFormatVersion));
        }
        const auto& payload = doc.at("payload");
        const auto expected = doc.at("checksum").get<std::string>();
        const auto actual = fmt::format("{:016x}", fnv1a(payload.dump()));
        if (expected != actual) {
            throw DataError("bundle checksum mismatch: recorded " + expected + ", computed " + actual);
        }
        auto bundle = payload_from_json(payload);
        bundle.validate();
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed bundle: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("malformed bundle: ") + e.what());
    }
}

void write_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    const auto text = bundle_to_string(bundle);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw DataError("cannot write bundle '" + path.string() + "'");
    }
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open bundle '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_bundle(text.str());
}

} // namespace cgft::recognizer
