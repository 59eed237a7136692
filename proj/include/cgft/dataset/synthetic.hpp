#pragma once

#include "cgft/dataset/manifest.hpp"
#include "cgft/fusion/matrix.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cgft::dataset {

using ClassPair = std::pair<std::uint32_t, std::uint32_t>;

/// Parameters of a Gaussian-cluster dataset seen through several "models".
///
/// Every model places each class at its own random center. For each pair
/// listed under a model, the second class's center is moved next to the
/// first's, so that model cannot tell the two apart while other models can.
struct SynthConfig {
    std::size_t n_models = 4;
    std::size_t n_classes = 8;
    std::vector<std::size_t> dims{16, 16, 16, 16}; ///< one entry per model
    std::size_t samples_per_class = 200;
    std::vector<std::vector<ClassPair>> confusable; ///< per model; may be empty
    double noise_stddev = 1.0;
    double center_spread = 1.0;      ///< stddev of center coordinates
    double confusable_offset = 0.05; ///< stddev of the residual center gap for confusable pairs
    std::uint64_t seed = 42;

    /// Throws ConfigError.
    void validate() const;
};

struct SyntheticDataset {
    std::vector<fusion::FeatureMatrix> features; ///< model ids "m0", "m1", ...
    fusion::LabelVector labels;
    DatasetManifest manifest; ///< categories "c0".., samples unassigned
};

/// Deterministic given config.seed. Values are rounded to float precision so
/// that they survive the binary feature format unchanged.
SyntheticDataset generate_synthetic(const SynthConfig& config);

/// 4 models, 8 classes, 200 samples per class, seed 42; each model confuses
/// two class pairs and no pair is confused by more than one model.
SynthConfig complementary_fixture();

} // namespace cgft::dataset
