#pragma once

#include "cgft/dataset/manifest.hpp"
#include "cgft/fusion/classifier.hpp"
#include "cgft/fusion/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cgft::recognizer {

enum class FusionMethod { pso, ga, equal, early };

std::string to_string(FusionMethod method);

/// Accepts "pso", "ga", "equal" and "early"; throws InvalidArgument otherwise.
FusionMethod parse_fusion_method(const std::string& text);

/// Everything the service needs to recognize a meal: the per-model
/// classifiers, the fusion weights and the merged label map.
///
/// Late-fusion bundles hold one classifier per input model. An early-fusion
/// bundle holds a single classifier over the concatenated inputs and a
/// weight vector of {1}.
struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    FusionMethod method = FusionMethod::equal;
    std::vector<std::string> input_models;
    std::vector<std::size_t> input_dims;
    std::vector<fusion::ClassifierModel> classifiers;
    fusion::WeightVector weights;
    dataset::MergedLabelMap labels;

    [[nodiscard]] std::size_t n_classes() const noexcept { return labels.n_merged(); }
    [[nodiscard]] std::size_t total_dims() const noexcept;

    /// Throws DataError when the parts disagree on shape.
    void validate() const;

    friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// JSON document carrying a format version and an FNV-1a checksum of the
/// serialized payload.
std::string bundle_to_string(const ModelBundle& bundle);

/// Throws DataError on a version or checksum mismatch or malformed content.
ModelBundle parse_bundle(const std::string& text);

void write_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

} // namespace cgft::recognizer
