#include "cgft/fusion/metrics.hpp"

#include "cgft/common/error.hpp"
#include "cgft/fusion/fusion.hpp"

namespace cgft::fusion {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), cells_(n_classes * n_classes, 0) {
    if (n_classes == 0) {
        throw InvalidArgument("confusion matrix needs at least one class");
    }
}

void ConfusionMatrix::add(std::uint32_t truth, std::uint32_t predicted) {
    if (truth >= n_ || predicted >= n_) {
        throw InvalidArgument("class index outside confusion matrix");
    }
    ++cells_[truth * n_ + predicted];
    ++total_;
}

double ConfusionMatrix::precision(std::size_t c) const {
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < n_; ++t) {
        predicted += count(t, c);
    }
    return predicted == 0 ? 0.0 : static_cast<double>(count(c, c)) / static_cast<double>(predicted);
}

double ConfusionMatrix::recall(std::size_t c) const {
    std::size_t actual = 0;
    for (std::size_t p = 0; p < n_; ++p) {
        actual += count(c, p);
    }
    return actual == 0 ? 0.0 : static_cast<double>(count(c, c)) / static_cast<double>(actual);
}

Metrics ConfusionMatrix::metrics() const {
    if (total_ == 0) {
        throw InvalidArgument("cannot compute metrics of an empty confusion matrix");
    }
    double p = 0.0;
    double r = 0.0;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < n_; ++c) {
        p += precision(c);
        r += recall(c);
        correct += count(c, c);
    }
    Metrics m;
    m.avg_precision = 100.0 * p / static_cast<double>(n_);
    m.avg_recall = 100.0 * r / static_cast<double>(n_);
    m.f_score = harmonic_f_score(m.avg_precision, m.avg_recall);
    m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(total_);
    return m;
}

double harmonic_f_score(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Metrics evaluate_predictions(const LabelVector& predicted, const LabelVector& labels, std::size_t n_classes) {
    if (labels.empty()) {
        throw InvalidArgument("cannot evaluate an empty label set");
    }
    if (predicted.size() != labels.size()) {
        throw InvalidArgument("prediction count does not match label count");
    }
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cm.add(labels[i], predicted[i]);
    }
    return cm.metrics();
}

Metrics evaluate(const ScoreMatrix& scores, const LabelVector& labels) {
    if (labels.size() != scores.rows()) {
        throw InvalidArgument("label count does not match score rows");
    }
    return evaluate_predictions(argmax_predict(scores), labels, scores.classes());
}

} // namespace cgft::fusion
