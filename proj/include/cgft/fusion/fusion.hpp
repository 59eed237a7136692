#pragma once

#include "cgft/fusion/matrix.hpp"

#include <span>
#include <vector>

namespace cgft::fusion {

inline constexpr const char* kEarlyFusionId = "early-fusion";
inline constexpr const char* kLateFusionId = "late-fusion";

/// Column-wise concatenation of per-model features (same samples, same order).
FeatureMatrix early_fuse(std::span<const FeatureMatrix> features);

/// Weighted sum of per-model probabilities, each row renormalized to 1.
/// Throws InvalidArgument on shape mismatch or when no weight is positive.
ScoreMatrix late_fuse(std::span<const ScoreMatrix> scores, const WeightVector& weights);

/// Fraction of samples whose fused argmax misses the label, in [0,1].
/// This is the quantity the weight optimizers minimize.
double fitness(const WeightVector& weights, std::span<const ScoreMatrix> scores, const LabelVector& labels);

/// Every entry 1/n. Throws InvalidArgument for n = 0.
WeightVector equal_weights(std::size_t n_models);

/// 1 at position k, 0 elsewhere.
WeightVector one_hot_weights(std::size_t n_models, std::size_t k);

/// Row argmax; ties go to the lowest class index.
LabelVector argmax_predict(const ScoreMatrix& scores);

/// Fraction of predictions equal to the labels. Throws on length mismatch.
double accuracy(const LabelVector& predicted, const LabelVector& labels);

} // namespace cgft::fusion
