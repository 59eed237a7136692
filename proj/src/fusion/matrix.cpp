#include "cgft/fusion/matrix.hpp"

#include "cgft/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace cgft::fusion {

FeatureMatrix::FeatureMatrix(std::string model_id, std::size_t n_samples, std::size_t n_dims,
                             std::vector<double> values)
    : model_id_(std::move(model_id)), rows_(n_samples), cols_(n_dims), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) {
        throw DataError("feature matrix '" + model_id_ + "' must have at least one sample and one dimension");
    }
    if (values_.size() != rows_ * cols_) {
        throw DataError("feature matrix '" + model_id_ + "': expected " + std::to_string(rows_ * cols_) +
                        " values, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("feature matrix '" + model_id_ + "': non-finite value in sample " +
                            std::to_string(i / cols_) + ", dimension " + std::to_string(i % cols_));
        }
    }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols_);
    for (std::size_t i : indices) {
        if (i >= rows_) {
            throw InvalidArgument("row index " + std::to_string(i) + " out of range");
        }
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return FeatureMatrix(model_id_, indices.size(), cols_, std::move(out));
}

ScoreMatrix::ScoreMatrix(std::string model_id, std::size_t n_samples, std::size_t n_classes,
                         std::vector<double> values)
    : model_id_(std::move(model_id)), rows_(n_samples), classes_(n_classes), values_(std::move(values)) {
    if (rows_ == 0 || classes_ == 0) {
        throw DataError("score matrix '" + model_id_ + "' must be non-empty");
    }
    if (values_.size() != rows_ * classes_) {
        throw DataError("score matrix '" + model_id_ + "': shape does not match value count");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double sum = 0.0;
        for (double p : row(i)) {
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw DataError("score matrix '" + model_id_ + "': entry outside [0,1] in row " + std::to_string(i));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw DataError("score matrix '" + model_id_ + "': row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
        }
    }
}

ScoreMatrix ScoreMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * classes_);
    for (std::size_t i : indices) {
        if (i >= rows_) {
            throw InvalidArgument("row index " + std::to_string(i) + " out of range");
        }
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return ScoreMatrix(model_id_, indices.size(), classes_, std::move(out));
}

WeightVector::WeightVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double x = values_[i];
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
            throw InvalidArgument("weight " + std::to_string(i) + " = " + std::to_string(x) + " is outside [0,1]");
        }
    }
}

bool WeightVector::any_positive() const noexcept {
    return std::any_of(values_.begin(), values_.end(), [](double x) { return x > 0.0; });
}

void check_labels(const LabelVector& labels, std::size_t n_classes) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes) {
            throw InvalidArgument("label " + std::to_string(labels[i]) + " at sample " + std::to_string(i) +
                                  " is outside [0, " + std::to_string(n_classes) + ")");
        }
    }
}

} // namespace cgft::fusion
