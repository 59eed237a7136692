#pragma once

#include "cgft/dataset/manifest.hpp"
#include "cgft/dataset/synthetic.hpp"
#include "cgft/fusion/classifier.hpp"
#include "cgft/fusion/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cgft::experiment {

/// Feature files (one per model, all listing the manifest's samples in
/// order) plus the manifest. The optional label file is cross-checked
/// against the manifest categories.
struct FileData {
    std::vector<std::filesystem::path> features;
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> labels;
};

/// JSON experiment description:
///
///   {
///     "seed": 42,
///     "data": {"synthetic": "complementary" | {SynthConfig fields}}
///           | {"features": [paths], "manifest": path, "labels": path},
///     "splits": {"train": 0.6, "validation": 0.2, "test": 0.2},
///     "classifier": {"lambda": 1e-4, "epochs": 50},
///     "optimizers": {"pso": {...}, "ga": {...}},
///     "output": {"dir": path}
///   }
///
/// Only "data" is required. Relative paths resolve against the config
/// file's directory. `seed` drives the split, the classifiers and both
/// optimizers.
struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::optional<dataset::SynthConfig> synthetic;
    std::optional<FileData> files;
    dataset::SplitRatios splits;
    fusion::TrainingOptions classifier;
    fusion::OptimizerConfig pso = fusion::OptimizerConfig::pso_defaults(42);
    fusion::OptimizerConfig ga = fusion::OptimizerConfig::ga_defaults(42);
    std::optional<std::filesystem::path> output_dir;

    /// Throws ConfigError.
    void validate() const;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace cgft::experiment
