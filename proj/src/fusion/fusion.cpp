#include "cgft/fusion/fusion.hpp"

#include "cgft/common/error.hpp"

namespace cgft::fusion {

FeatureMatrix early_fuse(std::span<const FeatureMatrix> features) {
    if (features.empty()) {
        throw InvalidArgument("early fusion needs at least one feature matrix");
    }
    const std::size_t n = features.front().rows();
    std::size_t total_dims = 0;
    for (const auto& m : features) {
        if (m.rows() != n) {
            throw InvalidArgument("early fusion: '" + m.model_id() + "' has " + std::to_string(m.rows()) +
                                  " samples, expected " + std::to_string(n));
        }
        total_dims += m.cols();
    }
    std::vector<double> out;
    out.reserve(n * total_dims);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& m : features) {
            const auto r = m.row(i);
            out.insert(out.end(), r.begin(), r.end());
        }
    }
    return FeatureMatrix(kEarlyFusionId, n, total_dims, std::move(out));
}

namespace {

void check_shapes(std::span<const ScoreMatrix> scores, const WeightVector& weights) {
    if (scores.empty()) {
        throw InvalidArgument("late fusion needs at least one score matrix");
    }
    if (weights.size() != scores.size()) {
        throw InvalidArgument("got " + std::to_string(weights.size()) + " weights for " +
                              std::to_string(scores.size()) + " score matrices");
    }
    const auto& first = scores.front();
    for (const auto& s : scores) {
        if (s.rows() != first.rows() || s.classes() != first.classes()) {
            throw InvalidArgument("score matrix '" + s.model_id() + "' shape differs from '" + first.model_id() + "'");
        }
    }
    if (!weights.any_positive()) {
        throw InvalidArgument("late fusion needs at least one positive weight");
    }
}

} // namespace

ScoreMatrix late_fuse(std::span<const ScoreMatrix> scores, const WeightVector& weights) {
    check_shapes(scores, weights);
    const std::size_t n = scores.front().rows();
    const std::size_t k = scores.front().classes();
    std::vector<double> out(n * k, 0.0);
    for (std::size_t m = 0; m < scores.size(); ++m) {
        const double x = weights[m];
        const auto& values = scores[m].values();
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += x * values[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            sum += out[i * k + c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            out[i * k + c] /= sum;
        }
    }
    return ScoreMatrix(kLateFusionId, n, k, std::move(out));
}

double fitness(const WeightVector& weights, std::span<const ScoreMatrix> scores, const LabelVector& labels) {
    check_shapes(scores, weights);
    if (labels.size() != scores.front().rows()) {
        throw InvalidArgument("label count does not match score rows");
    }
    return 1.0 - accuracy(argmax_predict(late_fuse(scores, weights)), labels);
}

WeightVector equal_weights(std::size_t n_models) {
    if (n_models == 0) {
        throw InvalidArgument("equal weights need at least one model");
    }
    return WeightVector(std::vector<double>(n_models, 1.0 / static_cast<double>(n_models)));
}

WeightVector one_hot_weights(std::size_t n_models, std::size_t k) {
    if (k >= n_models) {
        throw InvalidArgument("one-hot index out of range");
    }
    std::vector<double> x(n_models, 0.0);
    x[k] = 1.0;
    return WeightVector(std::move(x));
}

LabelVector argmax_predict(const ScoreMatrix& scores) {
    LabelVector out(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const auto r = scores.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < r.size(); ++c) {
            if (r[c] > r[best]) {
                best = c;
            }
        }
        out[i] = static_cast<std::uint32_t>(best);
    }
    return out;
}

double accuracy(const LabelVector& predicted, const LabelVector& labels) {
    if (predicted.size() != labels.size() || labels.empty()) {
        throw InvalidArgument("accuracy needs equal-length, non-empty label vectors");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        correct += predicted[i] == labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

} // namespace cgft::fusion
