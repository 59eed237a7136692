#include "cgft/experiment/experiment.hpp"

#include "cgft/common/error.hpp"
#include "cgft/experiment/report.hpp"
#include "cgft/fusion/feature_io.hpp"
#include "cgft/fusion/fusion.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace cgft::experiment {

using recognizer::FusionMethod;

const MethodResult& ExperimentReport::method(FusionMethod m) const {
    for (const auto& r : methods) {
        if (r.method == m) {
            return r;
        }
    }
    throw NotFound("report has no row for " + recognizer::to_string(m));
}

recognizer::ModelBundle ExperimentArtifacts::bundle(FusionMethod method) const {
    switch (method) {
    case FusionMethod::early:
        return early;
    case FusionMethod::equal:
        return late;
    case FusionMethod::pso:
    case FusionMethod::ga: {
        auto b = late;
        b.method = method;
        b.weights = method == FusionMethod::pso ? pso_weights : ga_weights;
        b.validate();
        return b;
    }
    }
    throw InvalidArgument("unknown fusion method");
}

ExperimentData load_data(const ExperimentConfig& config) {
    if (config.synthetic) {
        auto s = dataset::generate_synthetic(*config.synthetic);
        return {std::move(s.features), std::move(s.manifest)};
    }
    const auto& files = *config.files;
    ExperimentData data;
    auto require = [](const std::filesystem::path& p) {
        if (!std::filesystem::exists(p)) {
            throw NotFound("missing file '" + p.string() + "'");
        }
    };
    require(files.manifest);
    data.manifest = dataset::load_manifest(files.manifest);
    for (const auto& f : files.features) {
        require(f);
        data.features.push_back(fusion::read_features(f));
    }
    if (files.labels) {
        require(*files.labels);
        const auto labels = fusion::read_labels(*files.labels);
        if (labels != dataset::original_labels(data.manifest)) {
            throw DataError("label file '" + files.labels->string() + "' disagrees with the manifest categories");
        }
    }
    return data;
}

namespace {

std::vector<fusion::FeatureMatrix> select(const std::vector<fusion::FeatureMatrix>& features,
                                          const std::vector<std::size_t>& idx) {
    std::vector<fusion::FeatureMatrix> out;
    out.reserve(features.size());
    for (const auto& f : features) {
        out.push_back(f.select_rows(idx));
    }
    return out;
}

fusion::LabelVector pick(const fusion::LabelVector& labels, const std::vector<std::size_t>& idx) {
    fusion::LabelVector out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(labels[i]);
    }
    return out;
}

void require_all_classes(const fusion::LabelVector& labels, const dataset::MergedLabelMap& map, const char* split) {
    std::vector<bool> seen(map.n_merged(), false);
    for (auto l : labels) {
        seen[l] = true;
    }
    for (std::size_t c = 0; c < seen.size(); ++c) {
        if (!seen[c]) {
            throw DataError(fmt::format("{} split has no sample of class '{}'", split, map.merged_names[c]));
        }
    }
}

dataset::DatasetManifest assign_splits(const dataset::DatasetManifest& manifest, const ExperimentConfig& config) {
    std::size_t unassigned = 0;
    for (const auto& s : manifest.samples) {
        unassigned += s.split == dataset::Split::unassigned ? 1 : 0;
    }
    if (unassigned == manifest.samples.size()) {
        return dataset::split_dataset(manifest, config.splits, config.seed);
    }
    if (unassigned != 0) {
        throw DataError(fmt::format("manifest assigns splits to some samples but leaves {} unassigned", unassigned));
    }
    return manifest;
}

} // namespace

ExperimentResult run_experiment(const ExperimentData& data, const ExperimentConfig& config) {
    config.validate();
    data.manifest.validate();
    if (data.features.empty()) {
        throw DataError("no feature matrices");
    }
    for (const auto& f : data.features) {
        if (f.rows() != data.manifest.samples.size()) {
            throw DataError(fmt::format("feature file '{}' has {} rows but the manifest lists {} samples", f.model_id(),
                                        f.rows(), data.manifest.samples.size()));
        }
    }

    const auto manifest = assign_splits(data.manifest, config);
    const auto label_map = dataset::MergedLabelMap::from_manifest(manifest);
    const auto labels = dataset::apply_merge(dataset::original_labels(manifest), label_map);
    const auto train_idx = dataset::indices_of(manifest, dataset::Split::train);
    const auto val_idx = dataset::indices_of(manifest, dataset::Split::validation);
    const auto test_idx = dataset::indices_of(manifest, dataset::Split::test);

    const auto train_y = pick(labels, train_idx);
    const auto val_y = pick(labels, val_idx);
    const auto test_y = pick(labels, test_idx);
    require_all_classes(train_y, label_map, "train");
    require_all_classes(val_y, label_map, "validation");
    require_all_classes(test_y, label_map, "test");

    const auto train_x = select(data.features, train_idx);
    const auto val_x = select(data.features, val_idx);
    const auto test_x = select(data.features, test_idx);
    const std::size_t n_models = data.features.size();
    const std::size_t k = label_map.n_merged();

    auto options = config.classifier;
    options.seed = config.seed;

    ExperimentResult result;
    auto& report = result.report;
    report.seed = config.seed;
    report.n_classes = k;
    report.n_train = train_idx.size();
    report.n_validation = val_idx.size();
    report.n_test = test_idx.size();

    auto& late = result.artifacts.late;
    late.method = FusionMethod::equal;
    late.labels = label_map;
    late.weights = fusion::equal_weights(n_models);
    std::vector<fusion::ScoreMatrix> val_scores;
    std::vector<fusion::ScoreMatrix> test_scores;
    for (std::size_t m = 0; m < n_models; ++m) {
        late.input_models.push_back(data.features[m].model_id());
        late.input_dims.push_back(data.features[m].cols());
        late.classifiers.push_back(fusion::train_ovr_linear(train_x[m], train_y, k, options));
        val_scores.push_back(fusion::predict_scores(late.classifiers[m], val_x[m]));
        test_scores.push_back(fusion::predict_scores(late.classifiers[m], test_x[m]));
    }
    late.validate();

    for (std::size_t m = 0; m < n_models; ++m) {
        report.models.push_back({late.input_models[m], fusion::evaluate(test_scores[m], test_y),
                                 fusion::fitness(fusion::one_hot_weights(n_models, m), val_scores, val_y)});
    }

    auto pso_config = config.pso;
    pso_config.method = fusion::OptimizerMethod::pso;
    auto ga_config = config.ga;
    ga_config.method = fusion::OptimizerMethod::ga;
    const auto pso = fusion::optimize_weights(val_scores, val_y, pso_config);
    const auto ga = fusion::optimize_weights(val_scores, val_y, ga_config);
    result.artifacts.pso_weights = pso.weights;
    result.artifacts.ga_weights = ga.weights;

    auto& early = result.artifacts.early;
    early.method = FusionMethod::early;
    early.input_models = late.input_models;
    early.input_dims = late.input_dims;
    early.labels = label_map;
    early.weights = fusion::WeightVector({1.0});
    early.classifiers.push_back(fusion::train_ovr_linear(fusion::early_fuse(train_x), train_y, k, options));
    early.validate();
    const auto early_val = fusion::predict_scores(early.classifiers[0], fusion::early_fuse(val_x));
    const auto early_test = fusion::predict_scores(early.classifiers[0], fusion::early_fuse(test_x));

    auto late_row = [&](FusionMethod method, const fusion::WeightVector& w) {
        return MethodResult{method, fusion::evaluate(fusion::late_fuse(test_scores, w), test_y),
                            fusion::fitness(w, val_scores, val_y), w};
    };
    report.methods.push_back(late_row(FusionMethod::pso, pso.weights));
    report.methods.push_back(late_row(FusionMethod::ga, ga.weights));
    report.methods.push_back(MethodResult{FusionMethod::early, fusion::evaluate(early_test, test_y),
                                          1.0 - fusion::accuracy(fusion::argmax_predict(early_val), val_y),
                                          std::nullopt});
    report.methods.push_back(late_row(FusionMethod::equal, late.weights));
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_experiment(load_data(config), config);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw DataError("cannot write '" + path.string() + "'");
    }
}

} // namespace

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    write_text(dir / "report.txt", format_report_table(result.report));
    write_text(dir / "report.json", format_report_json(result.report));
    write_text(dir / "experiment.json", artifacts_to_string(result.artifacts));
}

std::string artifacts_to_string(const ExperimentArtifacts& a) {
    const nlohmann::ordered_json doc{
        {"format_version", 1},
        {"late", nlohmann::ordered_json::parse(recognizer::bundle_to_string(a.late))},
        {"early", nlohmann::ordered_json::parse(recognizer::bundle_to_string(a.early))},
        {"weights", {{"pso", a.pso_weights.values()}, {"ga", a.ga_weights.values()}}},
    };
    return doc.dump() + "\n";
}

ExperimentArtifacts parse_artifacts(const std::string& text) {
    try {
        const auto doc = nlohmann::ordered_json::parse(text);
        if (doc.at("format_version").get<int>() != 1) {
            throw DataError("unsupported experiment artifact version");
        }
        ExperimentArtifacts a;
        a.late = recognizer::parse_bundle(doc.at("late").dump());
        a.early = recognizer::parse_bundle(doc.at("early").dump());
        a.pso_weights = fusion::WeightVector(doc.at("weights").at("pso").get<std::vector<double>>());
        a.ga_weights = fusion::WeightVector(doc.at("weights").at("ga").get<std::vector<double>>());
        (void)a.bundle(FusionMethod::pso);
        (void)a.bundle(FusionMethod::ga);
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed experiment artifact: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("malformed experiment artifact: ") + e.what());
    }
}

ExperimentArtifacts load_artifacts(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open experiment artifact '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_artifacts(text.str());
}

} // namespace cgft::experiment
