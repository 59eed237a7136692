#pragma once

#include "cgft/common/error.hpp"
#include "cgft/recognizer/model_bundle.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cgft::recognizer {

/// The recognizer cannot run right now (no bundle deployed, extractor
/// missing or failing).
class Unavailable : public Error {
  public:
    using Error::Error;
};

struct Prediction {
    std::uint32_t merged_class = 0;
    std::string category;             ///< merged class name
    double confidence = 0.0;          ///< fused probability of the predicted class
    std::vector<std::string> members; ///< original names when the class is a merged group, else empty
    std::vector<double> probabilities;
};

/// One feature vector per input model, in the bundle's model order.
using ModelFeatures = std::vector<std::vector<double>>;

class Recognizer {
  public:
    /// Validates the bundle.
    explicit Recognizer(ModelBundle bundle);

    [[nodiscard]] const ModelBundle& bundle() const noexcept { return bundle_; }

    /// Fused class probabilities for a batch; one matrix per input model.
    [[nodiscard]] fusion::ScoreMatrix scores(std::span<const fusion::FeatureMatrix> features) const;

    /// Throws InvalidArgument naming the model and dims on shape mismatch.
    [[nodiscard]] Prediction predict(const ModelFeatures& features) const;

  private:
    ModelBundle bundle_;
};

/// Trains one classifier per model (or one over the concatenation for
/// early fusion) on `train` and packages them with `weights`.
ModelBundle train_bundle(std::span<const fusion::FeatureMatrix> train, const fusion::LabelVector& labels,
                         const dataset::MergedLabelMap& label_map, FusionMethod method, fusion::WeightVector weights,
                         const fusion::TrainingOptions& options = {});

/// Turns an image reference into per-model feature vectors.
class FeatureExtractor {
  public:
    virtual ~FeatureExtractor() = default;
    /// Throws Unavailable when extraction fails.
    virtual ModelFeatures extract(const std::string& image_ref, const std::vector<std::string>& models) = 0;
};

/// Runs an external extractor program once per model:
///   program --manifest <json> --model <name> --output <file>
/// The manifest lists the image as a single sample; the output must be a
/// one-row feature file.
class SidecarExtractor : public FeatureExtractor {
  public:
    SidecarExtractor(std::string program, std::filesystem::path work_dir);
    ModelFeatures extract(const std::string& image_ref, const std::vector<std::string>& models) override;

  private:
    std::string program_;
    std::filesystem::path work_dir_;
};

} // namespace cgft::recognizer
