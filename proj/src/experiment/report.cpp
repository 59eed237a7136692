#include "cgft/experiment/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace cgft::experiment {

using recognizer::FusionMethod;

std::string method_label(FusionMethod method) {
    switch (method) {
    case FusionMethod::pso:
        return "PSO based Fusion";
    case FusionMethod::ga:
        return "GA based Fusion";
    case FusionMethod::early:
        return "Early Fusion";
    case FusionMethod::equal:
        return "Equal weights";
    }
    return "?";
}

namespace {

constexpr const char* kRowFormat = "{:<18} {:>9.2f} {:>9.2f} {:>12.2f} {:>7.2f} {:>12.6f}  {}\n";
constexpr const char* kHeaderFormat = "{:<18} {:>9} {:>9} {:>12} {:>7} {:>12}  {}\n";
constexpr const char* kModelRowFormat = "{:<18} {:>9.2f} {:>9.2f} {:>12.2f} {:>7.2f} {:>12.6f}\n";
constexpr const char* kModelHeaderFormat = "{:<18} {:>9} {:>9} {:>12} {:>7} {:>12}\n";

std::string weights_text(const std::optional<fusion::WeightVector>& w) {
    if (!w) {
        return "-";
    }
    std::string out;
    for (std::size_t i = 0; i < w->size(); ++i) {
        out += fmt::format("{}{:.4f}", i == 0 ? "" : " ", (*w)[i]);
    }
    return out;
}

nlohmann::ordered_json metrics_json(const fusion::Metrics& m) {
    return {{"avg_precision", m.avg_precision},
            {"avg_recall", m.avg_recall},
            {"f_score", m.f_score},
            {"accuracy", m.accuracy}};
}

} // namespace

std::string format_report_table(const ExperimentReport& r) {
    std::string out = fmt::format("Fusion results (seed {}, {} classes, train {}, validation {}, test {})\n\n", r.seed,
                                  r.n_classes, r.n_train, r.n_validation, r.n_test);
    out += fmt::format(kHeaderFormat, "Method", "Avg. Pre.", "Avg. Rec.", "Avg. F-Score", "Acc.", "Val. fitness",
                       "Weights");
    for (const auto& m : r.methods) {
        out += fmt::format(kRowFormat, method_label(m.method), m.test.avg_precision, m.test.avg_recall, m.test.f_score,
                           m.test.accuracy, m.validation_fitness, weights_text(m.weights));
    }
    out += "\nSingle models\n";
    out += fmt::format(kModelHeaderFormat, "Model", "Avg. Pre.", "Avg. Rec.", "Avg. F-Score", "Acc.", "Val. fitness");
    for (const auto& m : r.models) {
        out += fmt::format(kModelRowFormat, m.model_id, m.test.avg_precision, m.test.avg_recall, m.test.f_score,
                           m.test.accuracy, m.validation_fitness);
    }
    return out;
}

std::string format_report_json(const ExperimentReport& r) {
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (const auto& m : r.methods) {
        methods.push_back({{"method", recognizer::to_string(m.method)},
                           {"label", method_label(m.method)},
                           {"test", metrics_json(m.test)},
                           {"validation_fitness", m.validation_fitness},
                           {"weights", m.weights ? nlohmann::ordered_json(m.weights->values()) : nlohmann::ordered_json(nullptr)}});
    }
    nlohmann::ordered_json models = nlohmann::ordered_json::array();
    for (const auto& m : r.models) {
        models.push_back({{"model_id", m.model_id},
                          {"test", metrics_json(m.test)},
                          {"validation_fitness", m.validation_fitness}});
    }
    const nlohmann::ordered_json doc{
        {"seed", r.seed},
        {"n_classes", r.n_classes},
        {"splits", {{"train", r.n_train}, {"validation", r.n_validation}, {"test", r.n_test}}},
        {"methods", methods},
        {"models", models},
    };
    return doc.dump(2) + "\n";
}

} // namespace cgft::experiment
