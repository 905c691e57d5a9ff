#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "fedsim/attacks.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

struct Honest {};

using Behavior = std::variant<Honest, FlipSpec, FreeRiderStrategy, PoisonStrategy>;

struct ParticipantSpec {
    int id = 0;
    Dataset data;
    Behavior behavior = Honest{};
    TrainConfig train_cfg;
};

/// One participant's submission for one round.
struct Update {
    int participant_id = 0;
    int round = 0;  // >= 1
    ModelParams params;
    // Self-declared training-set size; attackers may lie.
    std::int64_t reported_data_size = 0;
};

/// Audit record of a completed round.
struct RoundRecord {
    int round = 0;
    std::vector<int> selected_ids;  // ascending
    std::vector<Update> updates;    // ascending participant id
    ModelParams global_before;
    ModelParams global_after;
    double global_accuracy = 0.0;  // evaluate(global_after, test_set)
};

struct SelectionPolicy {
    enum class Kind { all, uniform_random };
    Kind kind = Kind::all;
    int k = 0;               // uniform_random: participants per round
    std::uint64_t seed = 0;  // uniform_random: draw keyed on (seed, round)

    static SelectionPolicy all_participants() { return {}; }
    static SelectionPolicy uniform_random(int k, std::uint64_t seed) {
        return {Kind::uniform_random, k, seed};
    }
};

enum class Weighting { uniform, data_size };

struct FederationConfig {
    std::vector<ParticipantSpec> participants;
    int rounds = 1;
    SelectionPolicy selection;
    Dataset test_set;
    Weighting weighting = Weighting::data_size;
    std::uint64_t seed = 0;
};

/// Small-magnitude initial global model, entries uniform in [-0.01, 0.01]
/// from a generator seeded by cfg.seed. Dimensions come from cfg.test_set.
ModelParams initialize(const FederationConfig& cfg);

/// Ids taking part in the given round. `all` returns every id ascending;
/// `uniform_random` returns k distinct ids in draw order.
std::vector<int> select_participants(const FederationConfig& cfg, int round);

/// One participant's update for one round: honest participants train
/// locally from the incoming global model, attacker behaviors dispatch to
/// the corresponding attack. Deterministic per (spec, global, round).
Update produce_update(const ParticipantSpec& spec, const ModelParams& global, int round);

/// FedAvg step. `uniform` averages updates equally; `data_size` weights by
/// reported_data_size. Summation runs in ascending participant id, so the
/// result is bit-identical under any input permutation.
ModelParams aggregate(const std::vector<Update>& updates, Weighting weighting);

/// Runs rounds 1..cfg.rounds of select -> produce_update -> aggregate ->
/// evaluate. Pure function of cfg.
std::vector<RoundRecord> run_federation(const FederationConfig& cfg);

}  // namespace fedsim
