#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cgft::fusion {

/// Class index per sample.
using LabelVector = std::vector<std::uint32_t>;

/// Per-model feature vectors, one row per sample, row-major.
class FeatureMatrix {
  public:
    /// Throws DataError on empty shape, size mismatch or a non-finite value
    /// (the message carries the offending sample index).
    FeatureMatrix(std::string model_id, std::size_t n_samples, std::size_t n_dims, std::vector<double> values);

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

    /// New matrix holding the given rows in the given order.
    [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

  private:
    std::string model_id_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

/// Class probabilities produced by one classifier (or by a fusion of several).
/// Every entry lies in [0,1] and every row sums to 1 within 1e-6.
class ScoreMatrix {
  public:
    static constexpr double kRowSumTolerance = 1e-6;

    ScoreMatrix(std::string model_id, std::size_t n_samples, std::size_t n_classes, std::vector<double> values);

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t classes() const noexcept { return classes_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * classes_, classes_};
    }
    [[nodiscard]] double at(std::size_t i, std::size_t c) const { return values_[i * classes_ + c]; }

    [[nodiscard]] ScoreMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

  private:
    std::string model_id_;
    std::size_t rows_;
    std::size_t classes_;
    std::vector<double> values_;
};

/// Fusion weights x(1..n), each in [0,1]. No sum constraint.
class WeightVector {
  public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] bool any_positive() const noexcept;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

  private:
    std::vector<double> values_;
};

/// Throws InvalidArgument unless every label is < n_classes.
void check_labels(const LabelVector& labels, std::size_t n_classes);

} // namespace cgft::fusion
