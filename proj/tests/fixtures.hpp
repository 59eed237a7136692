#pragma once

#include "cgft/dataset/synthetic.hpp"
#include "cgft/fusion/fusion.hpp"
#include "cgft/recognizer/recognizer.hpp"

#include <string>
#include <vector>

namespace cgft::test {

/// A small meal dataset: 8 named categories seen through 4 models, with
/// "mandi" and "kabsa" merged into one class. Low noise so the fused
/// recognizer separates the 7 merged classes almost perfectly.
struct MealFixture {
    dataset::DatasetManifest manifest; ///< split assigned
    dataset::MergedLabelMap label_map;
    std::vector<fusion::FeatureMatrix> features; ///< all samples, per model
    fusion::LabelVector merged_labels;            ///< all samples
    std::vector<std::size_t> train, validation, test;

    [[nodiscard]] std::vector<fusion::FeatureMatrix> rows(const std::vector<std::size_t>& idx) const {
        std::vector<fusion::FeatureMatrix> out;
        for (const auto& f : features) {
            out.push_back(f.select_rows(idx));
        }
        return out;
    }

    [[nodiscard]] fusion::LabelVector labels(const std::vector<std::size_t>& idx) const {
        fusion::LabelVector out;
        for (auto i : idx) {
            out.push_back(merged_labels[i]);
        }
        return out;
    }

    /// Per-model feature vectors of one sample.
    [[nodiscard]] recognizer::ModelFeatures sample(std::size_t i) const {
        recognizer::ModelFeatures out;
        for (const auto& f : features) {
            const auto r = f.row(i);
            out.emplace_back(r.begin(), r.end());
        }
        return out;
    }

    [[nodiscard]] recognizer::ModelBundle bundle(recognizer::FusionMethod method = recognizer::FusionMethod::equal) const {
        const auto w = method == recognizer::FusionMethod::early ? fusion::WeightVector({1.0})
                                                                 : fusion::equal_weights(features.size());
        return recognizer::train_bundle(rows(train), labels(train), label_map, method, w);
    }
};

inline const std::vector<std::string>& meal_names() {
    static const std::vector<std::string> names{"mandi",   "kabsa",     "hummus", "falafel",
                                                "shawarma", "tabbouleh", "kunafa", "fattoush"};
    return names;
}

inline MealFixture make_meal_fixture(std::size_t samples_per_class = 40) {
    dataset::SynthConfig cfg;
    cfg.samples_per_class = samples_per_class;
    cfg.noise_stddev = 0.5;
    cfg.seed = 7;
    auto data = dataset::generate_synthetic(cfg);

    MealFixture fx;
    auto& m = data.manifest;
    const auto& names = meal_names();
    for (auto& s : m.samples) {
        s.category = names[m.category_index(s.category)];
    }
    m.categories = names;
    m.merge_groups = {{"mandi/kabsa", {"mandi", "kabsa"}}};
    fx.manifest = dataset::split_dataset(m, {}, 11);
    fx.label_map = dataset::MergedLabelMap::from_manifest(fx.manifest);
    fx.features = std::move(data.features);
    fx.merged_labels = dataset::apply_merge(dataset::original_labels(fx.manifest), fx.label_map);
    fx.train = dataset::indices_of(fx.manifest, dataset::Split::train);
    fx.validation = dataset::indices_of(fx.manifest, dataset::Split::validation);
    fx.test = dataset::indices_of(fx.manifest, dataset::Split::test);
    return fx;
}

} // namespace cgft::test
