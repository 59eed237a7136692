#include "cgft/fusion/optimizer.hpp"

#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"
#include "cgft/fusion/fusion.hpp"

#include <algorithm>
#include <numeric>

namespace cgft::fusion {

std::string to_string(OptimizerMethod method) {
    return method == OptimizerMethod::pso ? "pso" : "ga";
}

OptimizerConfig OptimizerConfig::pso_defaults(std::uint64_t seed) {
    OptimizerConfig c;
    c.method = OptimizerMethod::pso;
    c.population = 30;
    c.iterations = 100;
    c.seed = seed;
    return c;
}

OptimizerConfig OptimizerConfig::ga_defaults(std::uint64_t seed) {
    OptimizerConfig c;
    c.method = OptimizerMethod::ga;
    c.population = 50;
    c.iterations = 100;
    c.seed = seed;
    return c;
}

void OptimizerConfig::validate() const {
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (population < 2) {
        throw ConfigError("optimizer population must be at least 2");
    }
    if (iterations < 1) {
        throw ConfigError("optimizer iterations must be at least 1");
    }
    if (method == OptimizerMethod::pso) {
        if (!(pso.velocity_clamp > 0.0) || pso.inertia < 0.0 || pso.cognitive < 0.0 || pso.social < 0.0) {
            throw ConfigError("PSO coefficients must be non-negative and the velocity clamp positive");
        }
    } else {
        if (ga.tournament_size < 2) {
            throw ConfigError("GA tournament size must be at least 2");
        }
        if (!probability(ga.crossover_probability) || !probability(ga.mutation_probability)) {
            throw ConfigError("GA probabilities must lie in [0,1]");
        }
        if (ga.mutation_stddev < 0.0 || ga.blend_alpha < 0.0) {
            throw ConfigError("GA mutation stddev and blend alpha must be non-negative");
        }
        if (ga.elite_count < 1 || ga.elite_count >= population) {
            throw ConfigError("GA elite count must be in [1, population)");
        }
    }
}

namespace {

using Position = std::vector<double>;

struct Candidate {
    Position x;
    double fitness = 1.0;
};

/// Fitness of a raw position; an all-zero vector cannot be fused and scores
/// worst so it never displaces a seeded candidate.
double score_position(const Position& x, std::span<const ScoreMatrix> scores, const LabelVector& labels) {
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
        return 1.0;
    }
    return fitness(WeightVector(x), scores, labels);
}

void check_inputs(std::span<const ScoreMatrix> scores, const LabelVector& labels, const OptimizerConfig& config,
                  OptimizerMethod expected) {
    if (config.method != expected) {
        throw InvalidArgument("optimizer config is for " + to_string(config.method) + ", expected " +
                              to_string(expected));
    }
    config.validate();
    if (scores.empty()) {
        throw InvalidArgument("no score matrices to fuse");
    }
    if (config.population < scores.size() + 1) {
        throw InvalidArgument("population " + std::to_string(config.population) + " cannot hold the " +
                              std::to_string(scores.size() + 1) + " seeded candidates");
    }
    for (const auto& s : scores) {
        if (s.rows() != labels.size() || s.classes() != scores.front().classes()) {
            throw InvalidArgument("score matrix '" + s.model_id() + "' does not match the validation labels");
        }
    }
    check_labels(labels, scores.front().classes());
}

/// Equal weights, then each one-hot vector, then uniform random fill.
std::vector<Position> seeded_positions(std::size_t n_models, std::size_t count, Rng& rng) {
    std::vector<Position> out;
    out.reserve(count);
    out.push_back(equal_weights(n_models).values());
    for (std::size_t k = 0; k < n_models; ++k) {
        out.push_back(one_hot_weights(n_models, k).values());
    }
    while (out.size() < count) {
        Position x(n_models);
        for (double& v : x) {
            v = rng.uniform();
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Lowest (fitness, index) wins so ties resolve independently of evaluation order.
std::size_t best_index(const std::vector<Candidate>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness < pop[best].fitness) {
            best = i;
        }
    }
    return best;
}

} // namespace

OptimizationResult optimize_weights_pso(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                        const OptimizerConfig& config) {
    check_inputs(scores, labels, config, OptimizerMethod::pso);
    const std::size_t dims = scores.size();
    const auto& p = config.pso;
    Rng rng(config.seed);

    std::vector<Candidate> particles;
    for (auto& x : seeded_positions(dims, config.population, rng)) {
        particles.push_back({std::move(x), 1.0});
    }
    std::vector<Position> velocity(particles.size(), Position(dims));
    for (auto& v : velocity) {
        for (double& vd : v) {
            vd = rng.uniform(-p.velocity_clamp, p.velocity_clamp);
        }
    }
    for (auto& particle : particles) {
        particle.fitness = score_position(particle.x, scores, labels);
    }
    std::vector<Candidate> personal = particles;
    Candidate global = personal[best_index(personal)];

    OptimizationResult result;
    result.best_history.push_back(global.fitness);
    for (std::size_t iter = 0; iter < config.iterations && global.fitness > 0.0; ++iter) {
        for (std::size_t i = 0; i < particles.size(); ++i) {
            auto& x = particles[i].x;
            auto& v = velocity[i];
            for (std::size_t d = 0; d < dims; ++d) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                v[d] = p.inertia * v[d] + p.cognitive * r1 * (personal[i].x[d] - x[d]) +
                       p.social * r2 * (global.x[d] - x[d]);
                v[d] = std::clamp(v[d], -p.velocity_clamp, p.velocity_clamp);
                x[d] = std::clamp(x[d] + v[d], 0.0, 1.0);
            }
        }
        for (std::size_t i = 0; i < particles.size(); ++i) {
            particles[i].fitness = score_position(particles[i].x, scores, labels);
            if (particles[i].fitness < personal[i].fitness) {
                personal[i] = particles[i];
            }
        }
        const std::size_t best = best_index(personal);
        if (personal[best].fitness < global.fitness) {
            global = personal[best];
        }
        result.best_history.push_back(global.fitness);
    }
    result.weights = WeightVector(global.x);
    result.fitness = global.fitness;
    return result;
}

OptimizationResult optimize_weights_ga(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                       const OptimizerConfig& config) {
    check_inputs(scores, labels, config, OptimizerMethod::ga);
    const std::size_t dims = scores.size();
    const auto& g = config.ga;
    Rng rng(config.seed);

    std::vector<Candidate> population;
    for (auto& x : seeded_positions(dims, config.population, rng)) {
        population.push_back({std::move(x), 1.0});
    }
    for (auto& c : population) {
        c.fitness = score_position(c.x, scores, labels);
    }

    auto tournament = [&](const std::vector<Candidate>& pop) -> const Candidate& {
        std::size_t best = rng.index(pop.size());
        for (std::size_t k = 1; k < g.tournament_size; ++k) {
            const std::size_t other = rng.index(pop.size());
            if (pop[other].fitness < pop[best].fitness ||
                (pop[other].fitness == pop[best].fitness && other < best)) {
                best = other;
            }
        }
        return pop[best];
    };

    auto mutate = [&](Position& x) {
        for (double& v : x) {
            if (rng.bernoulli(g.mutation_probability)) {
                v = std::clamp(v + rng.normal(0.0, g.mutation_stddev), 0.0, 1.0);
            }
        }
    };

    OptimizationResult result;
    result.best_history.push_back(population[best_index(population)].fitness);
    for (std::size_t gen = 0; gen < config.iterations; ++gen) {
        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return population[a].fitness < population[b].fitness; });

        std::vector<Candidate> next;
        next.reserve(population.size());
        for (std::size_t e = 0; e < g.elite_count; ++e) {
            next.push_back(population[order[e]]);
        }
        std::vector<Candidate> offspring;
        while (next.size() + offspring.size() < population.size()) {
            const Candidate& a = tournament(population);
            const Candidate& b = tournament(population);
            Position c1 = a.x;
            Position c2 = b.x;
            if (rng.bernoulli(g.crossover_probability)) {
                for (std::size_t d = 0; d < dims; ++d) {
                    const double lo = std::min(a.x[d], b.x[d]);
                    const double hi = std::max(a.x[d], b.x[d]);
                    const double spread = g.blend_alpha * (hi - lo);
                    c1[d] = std::clamp(rng.uniform(lo - spread, hi + spread), 0.0, 1.0);
                    c2[d] = std::clamp(rng.uniform(lo - spread, hi + spread), 0.0, 1.0);
                }
            }
            mutate(c1);
            mutate(c2);
            offspring.push_back({std::move(c1), 1.0});
            if (next.size() + offspring.size() < population.size()) {
                offspring.push_back({std::move(c2), 1.0});
            }
        }
        for (auto& child : offspring) {
            child.fitness = score_position(child.x, scores, labels);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        result.best_history.push_back(population[best_index(population)].fitness);
    }
    const Candidate& best = population[best_index(population)];
    result.weights = WeightVector(best.x);
    result.fitness = best.fitness;
    return result;
}

OptimizationResult optimize_weights(std::span<const ScoreMatrix> scores, const LabelVector& labels,
                                    const OptimizerConfig& config) {
    return config.method == OptimizerMethod::pso ? optimize_weights_pso(scores, labels, config)
                                                 : optimize_weights_ga(scores, labels, config);
}

} // namespace cgft::fusion
