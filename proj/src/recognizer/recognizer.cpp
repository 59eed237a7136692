#include "cgft/recognizer/recognizer.hpp"

#include "cgft/fusion/feature_io.hpp"
#include "cgft/fusion/fusion.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>

namespace cgft::recognizer {

Recognizer::Recognizer(ModelBundle bundle) : bundle_(std::move(bundle)) {
    bundle_.validate();
}

fusion::ScoreMatrix Recognizer::scores(std::span<const fusion::FeatureMatrix> features) const {
    const auto& b = bundle_;
    if (features.size() != b.input_models.size()) {
        throw InvalidArgument(fmt::format("recognizer expects features from {} models, got {}", b.input_models.size(),
                                          features.size()));
    }
    for (std::size_t m = 0; m < features.size(); ++m) {
        if (features[m].cols() != b.input_dims[m]) {
            throw InvalidArgument(fmt::format("model '{}' expects {} feature dims, got {}", b.input_models[m],
                                              b.input_dims[m], features[m].cols()));
        }
    }
    if (b.method == FusionMethod::early) {
        const auto fused = fusion::early_fuse(features);
        const auto s = fusion::predict_scores(b.classifiers[0], fused);
        return fusion::late_fuse(std::span(&s, 1), b.weights);
    }
    std::vector<fusion::ScoreMatrix> per_model;
    per_model.reserve(features.size());
    for (std::size_t m = 0; m < features.size(); ++m) {
        per_model.push_back(fusion::predict_scores(b.classifiers[m], features[m]));
    }
    return fusion::late_fuse(per_model, b.weights);
}

Prediction Recognizer::predict(const ModelFeatures& features) const {
    const auto& b = bundle_;
    if (features.size() != b.input_models.size()) {
        throw InvalidArgument(fmt::format("recognizer expects features from {} models, got {}", b.input_models.size(),
                                          features.size()));
    }
    std::vector<fusion::FeatureMatrix> rows;
    rows.reserve(features.size());
    for (std::size_t m = 0; m < features.size(); ++m) {
        if (features[m].size() != b.input_dims[m]) {
            throw InvalidArgument(fmt::format("model '{}' expects {} feature dims, got {}", b.input_models[m],
                                              b.input_dims[m], features[m].size()));
        }
        rows.emplace_back(b.input_models[m], 1, features[m].size(), features[m]);
    }
    const auto fused = scores(rows);
    const auto row = fused.row(0);
    const auto best = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());

    Prediction p;
    p.merged_class = best;
    p.category = b.labels.merged_names[best];
    p.confidence = row[best];
    if (b.labels.is_group(best)) {
        p.members = b.labels.members[best];
    }
    p.probabilities.assign(row.begin(), row.end());
    return p;
}

ModelBundle train_bundle(std::span<const fusion::FeatureMatrix> train, const fusion::LabelVector& labels,
                         const dataset::MergedLabelMap& label_map, FusionMethod method, fusion::WeightVector weights,
                         const fusion::TrainingOptions& options) {
    ModelBundle b;
    b.method = method;
    b.labels = label_map;
    b.weights = std::move(weights);
    for (const auto& f : train) {
        b.input_models.push_back(f.model_id());
        b.input_dims.push_back(f.cols());
    }
    if (method == FusionMethod::early) {
        b.classifiers.push_back(fusion::train_ovr_linear(fusion::early_fuse(train), labels, label_map.n_merged(), options));
    } else {
        for (const auto& f : train) {
            b.classifiers.push_back(fusion::train_ovr_linear(f, labels, label_map.n_merged(), options));
        }
    }
    b.validate();
    return b;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                out += fmt::format("\\u{:04x}", static_cast<unsigned>(c));
            } else {
                out += c;
            }
        }
    }
    return out;
}

std::atomic<std::uint64_t> g_request_counter{0};

} // namespace

SidecarExtractor::SidecarExtractor(std::string program, std::filesystem::path work_dir)
    : program_(std::move(program)), work_dir_(std::move(work_dir)) {}

ModelFeatures SidecarExtractor::extract(const std::string& image_ref, const std::vector<std::string>& models) {
    if (program_.empty()) {
        throw Unavailable("no feature extractor configured for image references");
    }
    std::error_code ec;
    std::filesystem::create_directories(work_dir_, ec);
    const auto n = g_request_counter.fetch_add(1);
    const auto manifest = work_dir_ / fmt::format("extract-{}.json", n);
    {
        std::ofstream out(manifest, std::ios::trunc);
        out << "{\"categories\":[\"unknown\"],\"merge_groups\":[],\"samples\":[{\"id\":\"query\",\"category\":"
               "\"unknown\",\"split\":\"unassigned\",\"image_path\":\""
            << json_escape(image_ref) << "\"}]}\n";
        if (!out) {
            throw Unavailable("cannot write extractor request in '" + work_dir_.string() + "'");
        }
    }
    ModelFeatures result;
    for (const auto& model : models) {
        const auto output = work_dir_ / fmt::format("extract-{}-{}.cgft", n, result.size());
        const auto cmd = fmt::format("{} --manifest {} --model {} --output {} >/dev/null 2>&1", program_,
                                     shell_quote(manifest.string()), shell_quote(model), shell_quote(output.string()));
        const int rc = std::system(cmd.c_str());
        if (rc != 0) {
            std::filesystem::remove(manifest, ec);
            throw Unavailable(fmt::format("feature extractor failed for model '{}' (status {})", model, rc));
        }
        try {
            const auto features = fusion::read_features(output);
            std::filesystem::remove(output, ec);
            if (features.rows() != 1) {
                throw DataError(fmt::format("expected 1 row, got {}", features.rows()));
            }
            const auto row = features.row(0);
            result.emplace_back(row.begin(), row.end());
        } catch (const Error& e) {
            std::filesystem::remove(manifest, ec);
            throw Unavailable(fmt::format("feature extractor output for model '{}' is unusable: {}", model, e.what()));
        }
    }
    std::filesystem::remove(manifest, ec);
    return result;
}

} // namespace cgft::recognizer
