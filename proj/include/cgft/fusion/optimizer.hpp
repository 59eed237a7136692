#pragma once

#include "cgft/fusion/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cgft::fusion {

enum class OptimizerMethod { pso, ga };

std::string to_string(OptimizerMethod method);

struct PsoParams {
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    double velocity_clamp = 0.2; ///< per-dimension |v| bound
};

struct GaParams {
    std::size_t tournament_size = 3;
    double crossover_probability = 0.9;
    double blend_alpha = 0.5; ///< BLX-alpha
    double mutation_stddev = 0.1;
    double mutation_probability = 0.1; ///< per gene
    std::size_t elite_count = 2;
};

/// Search settings for fusion-weight optimization. `population` is the swarm
/// size for PSO and the population size for GA; `iterations` counts PSO
/// iterations or GA generations.
struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::pso;
    std::size_t population = 30;
    std::size_t iterations = 100;
    std::uint64_t seed = 0;
    PsoParams pso;
    GaParams ga;

    static OptimizerConfig pso_defaults(std::uint64_t seed);
    static OptimizerConfig ga_defaults(std::uint64_t seed);

    /// Throws ConfigError on sizes < 2, zero iterations, probabilities
    /// outside [0,1] or an elite count that does not fit the population.
    void validate() const;
};

struct OptimizationResult {
    WeightVector weights;
    double fitness = 1.0;
    /// Best fitness after initialization, then after every iteration/generation.
    std::vector<double> best_history;
};

/// Particle swarm search over [0,1]^n. The swarm starts with the equal-weight
/// vector and every one-hot vector, so the result is never worse than those.
/// Throws InvalidArgument when the swarm cannot hold n_models + 1 particles.
OptimizationResult optimize_weights_pso(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                        const OptimizerConfig& config);

/// Real-coded GA with tournament selection, blend crossover, Gaussian mutation
/// and elitism. Seeding matches the PSO so the same guarantee holds.
OptimizationResult optimize_weights_ga(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                       const OptimizerConfig& config);

/// Dispatches on config.method.
OptimizationResult optimize_weights(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                    const OptimizerConfig& config);

} // namespace cgft::fusion
