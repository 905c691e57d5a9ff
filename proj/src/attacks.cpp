#include "fedsim/attacks.hpp"

#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

Dataset flip_labels(const Dataset& data, const FlipSpec& spec) {
    if (data.num_classes < 2)
        throw std::invalid_argument("flip_labels: needs at least two classes");
    if (spec.p < 0.0 || spec.p > 1.0)
        throw std::invalid_argument("flip_labels: p must be in [0, 1]");

    Dataset out = data;
    Rng rng(spec.seed);
    for (Eigen::Index i = 0; i < out.labels.size(); ++i) {
        if (rng.uniform() < spec.p) {
            // uniform over the other num_classes - 1 labels
            const auto offset = 1 + rng.below(data.num_classes - 1);
            out.labels[i] = static_cast<int>((out.labels[i] + offset) % data.num_classes);
        }
    }
    return out;
}

ModelParams free_rider_update(const FreeRiderStrategy& strategy, const ModelParams& global,
                              int round) {
    if (strategy.scale < 0.0)
        throw std::invalid_argument("free_rider_update: scale must be >= 0");
    Rng rng(derive_seed(strategy.seed, static_cast<std::uint64_t>(round)));
    switch (strategy.kind) {
        case FreeRiderStrategy::Kind::echo_global:
            return global;
        case FreeRiderStrategy::Kind::random_params: {
            ModelParams fake = ModelParams::zero(global.num_classes(), global.dim());
            for (Eigen::Index k = 0; k < fake.weights.rows(); ++k)
                for (Eigen::Index j = 0; j < fake.weights.cols(); ++j)
                    fake.weights(k, j) = strategy.scale * rng.normal();
            for (Eigen::Index k = 0; k < fake.biases.size(); ++k)
                fake.biases[k] = strategy.scale * rng.normal();
            return fake;
        }
        case FreeRiderStrategy::Kind::perturbed_global: {
            ModelParams fake = global;
            for (Eigen::Index k = 0; k < fake.weights.rows(); ++k)
                for (Eigen::Index j = 0; j < fake.weights.cols(); ++j)
                    fake.weights(k, j) += strategy.scale * rng.normal();
            for (Eigen::Index k = 0; k < fake.biases.size(); ++k)
                fake.biases[k] += strategy.scale * rng.normal();
            return fake;
        }
    }
    throw std::logic_error("free_rider_update: unreachable");
}

ModelParams poison_update(const PoisonStrategy& strategy, const ModelParams& honest_params) {
    if (strategy.scale < 0.0)
        throw std::invalid_argument("poison_update: scale must be >= 0");
    switch (strategy.kind) {
        case PoisonStrategy::Kind::sign_flip: {
            ModelParams poisoned;
            poisoned.weights = -honest_params.weights;
            poisoned.biases = -honest_params.biases;
            return poisoned;
        }
        case PoisonStrategy::Kind::gaussian_noise: {
            Rng rng(strategy.seed);
            ModelParams poisoned = honest_params;
            for (Eigen::Index k = 0; k < poisoned.weights.rows(); ++k)
                for (Eigen::Index j = 0; j < poisoned.weights.cols(); ++j)
                    poisoned.weights(k, j) += strategy.scale * rng.normal();
            for (Eigen::Index k = 0; k < poisoned.biases.size(); ++k)
                poisoned.biases[k] += strategy.scale * rng.normal();
            return poisoned;
        }
    }
    throw std::logic_error("poison_update: unreachable");
}

}  // namespace fedsim
