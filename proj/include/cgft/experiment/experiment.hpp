#pragma once

#include "cgft/experiment/config.hpp"
#include "cgft/fusion/metrics.hpp"
#include "cgft/recognizer/model_bundle.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cgft::experiment {

struct ExperimentData {
    std::vector<fusion::FeatureMatrix> features; ///< one per model, rows in manifest order
    dataset::DatasetManifest manifest;
};

/// Generates or reads the configured data. Throws DataError or NotFound.
ExperimentData load_data(const ExperimentConfig& config);

struct MethodResult {
    recognizer::FusionMethod method = recognizer::FusionMethod::pso;
    fusion::Metrics test;              ///< percentages on the test split
    double validation_fitness = 1.0;   ///< 1 - validation accuracy
    std::optional<fusion::WeightVector> weights; ///< absent for early fusion
};

struct ModelResult {
    std::string model_id;
    fusion::Metrics test;
    double validation_fitness = 1.0;
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::size_t n_classes = 0; ///< after merging
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    std::size_t n_test = 0;
    std::vector<MethodResult> methods; ///< PSO, GA, Early, Equal
    std::vector<ModelResult> models;

    [[nodiscard]] const MethodResult& method(recognizer::FusionMethod m) const;
};

/// Trained parts from which any method's bundle can be exported.
struct ExperimentArtifacts {
    recognizer::ModelBundle late;  ///< per-model classifiers with equal weights
    recognizer::ModelBundle early; ///< classifier over the concatenated features
    fusion::WeightVector pso_weights;
    fusion::WeightVector ga_weights;

    /// Bundle for one method. Throws InvalidArgument for an unknown method.
    [[nodiscard]] recognizer::ModelBundle bundle(recognizer::FusionMethod method) const;
};

struct ExperimentResult {
    ExperimentReport report;
    ExperimentArtifacts artifacts;
};

/// Trains one classifier per model on the train split, fits PSO and GA
/// weights on the validation split and evaluates PSO, GA, early fusion and
/// equal weights on the test split. Deterministic given the config.
///
/// Throws DataError on inconsistent shapes, a mixed or partial split
/// assignment, or a split missing a class.
ExperimentResult run_experiment(const ExperimentData& data, const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// report.txt, report.json and experiment.json under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

std::string artifacts_to_string(const ExperimentArtifacts& artifacts);
/// Throws DataError on malformed or corrupted content.
ExperimentArtifacts parse_artifacts(const std::string& text);
ExperimentArtifacts load_artifacts(const std::filesystem::path& path);

} // namespace cgft::experiment
