#pragma once

#include "cgft/fusion/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cgft::fusion {

struct TrainingOptions {
    double lambda = 1e-4;     ///< L2 regularization strength
    std::size_t epochs = 50;
    std::uint64_t seed = 0;   ///< drives the per-epoch sample order
};

/// One-vs-rest linear classifier over standardized features.
///
/// Inputs are standardized with the training split's per-dimension mean and
/// stddev (stddev floored at kMinStddev); class c's decision margin is
/// `weights[c] . z + biases[c]` on the standardized vector z.
struct ClassifierModel {
    static constexpr double kMinStddev = 1e-8;

    std::string model_id;
    std::size_t n_classes = 0;
    std::size_t n_dims = 0;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<double> weights; ///< n_classes x n_dims, row-major
    std::vector<double> biases;

    /// Throws DataError when the parameter arrays disagree with the shape.
    void validate() const;

    /// Per-class margins for one raw (unstandardized) feature row.
    [[nodiscard]] std::vector<double> margins(std::span<const double> features) const;

    friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

/// Fits one hinge-loss separator per class by stochastic subgradient descent
/// with step 1/(lambda*t). Deterministic given options.seed.
///
/// Throws InvalidArgument on length mismatch or n_classes < 2, and DataError
/// naming the class when some class has no training sample.
ClassifierModel train_ovr_linear(const FeatureMatrix& features, const LabelVector& labels, std::size_t n_classes,
                                 const TrainingOptions& options = {});

/// Softmax over the per-class margins, one row per sample.
/// Throws InvalidArgument with expected/actual dims on mismatch.
ScoreMatrix predict_scores(const ClassifierModel& model, const FeatureMatrix& features);

/// Numerically stable softmax, written into `out`.
void softmax(std::span<const double> logits, std::span<double> out);

} // namespace cgft::fusion
