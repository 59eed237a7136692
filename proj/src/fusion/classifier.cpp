#include "cgft/fusion/classifier.hpp"

#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cgft::fusion {

void ClassifierModel::validate() const {
    if (n_classes < 2 || n_dims == 0) {
        throw DataError("classifier '" + model_id + "' has an invalid shape");
    }
    if (mean.size() != n_dims || stddev.size() != n_dims || weights.size() != n_classes * n_dims ||
        biases.size() != n_classes) {
        throw DataError("classifier '" + model_id + "' parameter sizes disagree with its shape");
    }
    for (double s : stddev) {
        if (!(s > 0.0)) {
            throw DataError("classifier '" + model_id + "' has a non-positive stddev");
        }
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(mean.begin(), mean.end(), finite) || !std::all_of(weights.begin(), weights.end(), finite) ||
        !std::all_of(biases.begin(), biases.end(), finite)) {
        throw DataError("classifier '" + model_id + "' has non-finite parameters");
    }
}

std::vector<double> ClassifierModel::margins(std::span<const double> features) const {
    std::vector<double> z(n_dims);
    for (std::size_t d = 0; d < n_dims; ++d) {
        z[d] = (features[d] - mean[d]) / stddev[d];
    }
    std::vector<double> out(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        const double* w = weights.data() + c * n_dims;
        out[c] = std::inner_product(z.begin(), z.end(), w, biases[c]);
    }
    return out;
}

void softmax(std::span<const double> logits, std::span<double> out) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        sum += out[i];
    }
    for (double& p : out) {
        p /= sum;
    }
}

ClassifierModel train_ovr_linear(const FeatureMatrix& features, const LabelVector& labels, std::size_t n_classes,
                                 const TrainingOptions& options) {
    const std::size_t n = features.rows();
    const std::size_t dims = features.cols();
    if (labels.size() != n) {
        throw InvalidArgument("label count " + std::to_string(labels.size()) + " does not match sample count " +
                              std::to_string(n));
    }
    if (n_classes < 2) {
        throw InvalidArgument("need at least two classes");
    }
    if (!(options.lambda > 0.0) || options.epochs == 0) {
        throw InvalidArgument("lambda must be positive and epochs at least 1");
    }
    check_labels(labels, n_classes);
    std::vector<std::size_t> per_class(n_classes, 0);
    for (auto y : labels) {
        ++per_class[y];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (per_class[c] == 0) {
            throw DataError("class " + std::to_string(c) + " has no training samples");
        }
    }

    ClassifierModel model;
    model.model_id = features.model_id();
    model.n_classes = n_classes;
    model.n_dims = dims;
    model.mean.assign(dims, 0.0);
    model.stddev.assign(dims, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = features.row(i);
        for (std::size_t d = 0; d < dims; ++d) {
            model.mean[d] += r[d];
        }
    }
    for (double& m : model.mean) {
        m /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = features.row(i);
        for (std::size_t d = 0; d < dims; ++d) {
            const double delta = r[d] - model.mean[d];
            model.stddev[d] += delta * delta;
        }
    }
    for (double& s : model.stddev) {
        s = std::max(std::sqrt(s / static_cast<double>(n)), ClassifierModel::kMinStddev);
    }

    std::vector<double> standardized(n * dims);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = features.row(i);
        for (std::size_t d = 0; d < dims; ++d) {
            standardized[i * dims + d] = (r[d] - model.mean[d]) / model.stddev[d];
        }
    }

    // One visiting order per epoch, shared by every class's binary problem.
    Rng rng(options.seed);
    std::vector<std::vector<std::size_t>> orders(options.epochs);
    for (auto& order : orders) {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
    }

    model.weights.assign(n_classes * dims, 0.0);
    model.biases.assign(n_classes, 0.0);
    const double lambda = options.lambda;
    const double radius = 1.0 / std::sqrt(lambda);

    for (std::size_t c = 0; c < n_classes; ++c) {
        double* w = model.weights.data() + c * dims;
        double& b = model.biases[c];
        std::size_t t = 0;
        for (const auto& order : orders) {
            for (std::size_t i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double y = labels[i] == c ? 1.0 : -1.0;
                const double* x = standardized.data() + i * dims;
                const double margin = y * std::inner_product(x, x + dims, w, b);
                // The bias is treated as the weight of a constant feature and
                // regularized with the rest.
                const double shrink = 1.0 - eta * lambda;
                for (std::size_t d = 0; d < dims; ++d) {
                    w[d] *= shrink;
                }
                b *= shrink;
                if (margin < 1.0) {
                    for (std::size_t d = 0; d < dims; ++d) {
                        w[d] += eta * y * x[d];
                    }
                    b += eta * y;
                }
                double norm_sq = b * b;
                for (std::size_t d = 0; d < dims; ++d) {
                    norm_sq += w[d] * w[d];
                }
                const double norm = std::sqrt(norm_sq);
                if (norm > radius) {
                    const double scale = radius / norm;
                    for (std::size_t d = 0; d < dims; ++d) {
                        w[d] *= scale;
                    }
                    b *= scale;
                }
            }
        }
    }
    return model;
}

ScoreMatrix predict_scores(const ClassifierModel& model, const FeatureMatrix& features) {
    if (features.cols() != model.n_dims) {
        throw InvalidArgument("classifier '" + model.model_id + "' expects " + std::to_string(model.n_dims) +
                              " feature dims, got " + std::to_string(features.cols()));
    }
    std::vector<double> out(features.rows() * model.n_classes);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto m = model.margins(features.row(i));
        softmax(m, std::span<double>(out.data() + i * model.n_classes, model.n_classes));
    }
    return ScoreMatrix(model.model_id, features.rows(), model.n_classes, std::move(out));
}

} // namespace cgft::fusion
