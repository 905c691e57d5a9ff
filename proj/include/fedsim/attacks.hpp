#pragma once

#include <cstdint>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

/// Label-flipping data poisoning: each row's label is replaced, with
/// probability p, by a uniformly random *different* class.
struct FlipSpec {
    double p = 0.0;
    std::uint64_t seed = 0;
    // Default is a static poisoned shard (the same flips every round);
    // set to true to re-randomize the flips per round.
    bool reflip_each_round = false;
};

/// Fake updates from a participant that never trains.
struct FreeRiderStrategy {
    enum class Kind { random_params, echo_global, perturbed_global };
    Kind kind = Kind::echo_global;
    double scale = 1.0;  // stddev of random_params entries / perturbation noise
    std::uint64_t seed = 0;
};

/// Untargeted model poisoning applied to an honestly trained local model.
struct PoisonStrategy {
    enum class Kind { sign_flip, gaussian_noise };
    Kind kind = Kind::sign_flip;
    double scale = 0.0;  // stddev of additive noise for gaussian_noise
    std::uint64_t seed = 0;
};

/// Returns a copy of `data` with labels flipped per `spec`. Features are
/// untouched; deterministic per (data, spec). Requires at least two classes.
Dataset flip_labels(const Dataset& data, const FlipSpec& spec);

/// Fabricated update for one round; deterministic per (strategy, round).
ModelParams free_rider_update(const FreeRiderStrategy& strategy, const ModelParams& global,
                              int round);

/// Corrupts honestly trained parameters per the strategy.
ModelParams poison_update(const PoisonStrategy& strategy, const ModelParams& honest_params);

}  // namespace fedsim
