#include "cgft/dataset/synthetic.hpp"

#include "cgft/common/error.hpp"
#include "cgft/common/rng.hpp"

namespace cgft::dataset {

void SynthConfig::validate() const {
    if (n_models < 1 || n_classes < 1 || samples_per_class < 1) {
        throw ConfigError("synthetic config: model, class and per-class sample counts must be at least 1");
    }
    if (dims.size() != n_models) {
        throw ConfigError("synthetic config: expected " + std::to_string(n_models) + " dims entries, got " +
                          std::to_string(dims.size()));
    }
    for (auto d : dims) {
        if (d < 1) {
            throw ConfigError("synthetic config: every model needs at least one dimension");
        }
    }
    if (confusable.size() > n_models) {
        throw ConfigError("synthetic config: more confusable lists than models");
    }
    for (const auto& pairs : confusable) {
        for (const auto& [a, b] : pairs) {
            if (a >= n_classes || b >= n_classes || a == b) {
                throw ConfigError("synthetic config: confusable pair (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") is not a pair of distinct valid classes");
            }
        }
    }
    if (noise_stddev < 0.0 || center_spread < 0.0 || confusable_offset < 0.0) {
        throw ConfigError("synthetic config: stddevs must be non-negative");
    }
}

SyntheticDataset generate_synthetic(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    auto as_float = [](double v) { return static_cast<double>(static_cast<float>(v)); };

    // centers[m][c * dims + d]
    std::vector<std::vector<double>> centers(config.n_models);
    for (std::size_t m = 0; m < config.n_models; ++m) {
        const std::size_t dims = config.dims[m];
        auto& cm = centers[m];
        cm.resize(config.n_classes * dims);
        for (double& v : cm) {
            v = rng.normal(0.0, config.center_spread);
        }
        if (m < config.confusable.size()) {
            for (const auto& [a, b] : config.confusable[m]) {
                for (std::size_t d = 0; d < dims; ++d) {
                    cm[b * dims + d] = cm[a * dims + d] + rng.normal(0.0, config.confusable_offset);
                }
            }
        }
    }

    const std::size_t n = config.n_classes * config.samples_per_class;
    SyntheticDataset out;
    out.labels.reserve(n);
    for (std::size_t c = 0; c < config.n_classes; ++c) {
        out.manifest.categories.push_back("c" + std::to_string(c));
    }
    for (std::size_t c = 0; c < config.n_classes; ++c) {
        for (std::size_t k = 0; k < config.samples_per_class; ++k) {
            out.labels.push_back(static_cast<std::uint32_t>(c));
            const std::size_t i = out.manifest.samples.size();
            out.manifest.samples.push_back({"s" + std::to_string(i), out.manifest.categories[c], Split::unassigned, {}});
        }
    }
    for (std::size_t m = 0; m < config.n_models; ++m) {
        const std::size_t dims = config.dims[m];
        std::vector<double> values(n * dims);
        for (std::size_t i = 0; i < n; ++i) {
            const double* center = centers[m].data() + out.labels[i] * dims;
            for (std::size_t d = 0; d < dims; ++d) {
                values[i * dims + d] = as_float(center[d] + rng.normal(0.0, config.noise_stddev));
            }
        }
        out.features.emplace_back("m" + std::to_string(m), n, dims, std::move(values));
    }
    return out;
}

SynthConfig complementary_fixture() {
    SynthConfig c;
    c.n_models = 4;
    c.n_classes = 8;
    c.dims = {16, 16, 16, 16};
    c.samples_per_class = 200;
    c.confusable = {
        {{0, 1}, {2, 3}},
        {{4, 5}, {6, 7}},
        {{0, 2}, {5, 7}},
        {{1, 3}, {4, 6}},
    };
    c.noise_stddev = 1.0;
    c.seed = 42;
    return c;
}

} // namespace cgft::dataset
