#pragma once

#include "cgft/fusion/matrix.hpp"

#include <vector>

namespace cgft::fusion {

/// Classification quality, all in percent.
struct Metrics {
    double avg_precision = 0.0; ///< macro average over classes
    double avg_recall = 0.0;    ///< macro average over classes
    double f_score = 0.0;       ///< harmonic mean of the two macro averages
    double accuracy = 0.0;
};

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(std::size_t n_classes);

    void add(std::uint32_t truth, std::uint32_t predicted);

    [[nodiscard]] std::size_t classes() const noexcept { return n_; }
    [[nodiscard]] std::size_t count(std::size_t truth, std::size_t predicted) const { return cells_[truth * n_ + predicted]; }
    [[nodiscard]] std::size_t total() const noexcept { return total_; }

    /// TP/(TP+FP); 0 when the class was never predicted.
    [[nodiscard]] double precision(std::size_t c) const;
    /// TP/(TP+FN); 0 when the class never occurs.
    [[nodiscard]] double recall(std::size_t c) const;

    [[nodiscard]] Metrics metrics() const;

  private:
    std::size_t n_;
    std::vector<std::size_t> cells_;
    std::size_t total_ = 0;
};

/// 2PR/(P+R), or 0 when P+R = 0. Units are whatever P and R use.
double harmonic_f_score(double precision, double recall);

/// Metrics of the per-row argmax against the labels. Throws InvalidArgument on
/// empty input or length mismatch.
Metrics evaluate(const ScoreMatrix& scores, const LabelVector& labels);

Metrics evaluate_predictions(const LabelVector& predicted, const LabelVector& labels, std::size_t n_classes);

} // namespace cgft::fusion
