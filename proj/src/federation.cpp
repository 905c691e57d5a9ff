#include "fedsim/federation.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

// Salt constants keep the per-purpose generator streams apart.
constexpr std::uint64_t kInitSalt = 0x696e6974;  // "init"

void validate_config(const FederationConfig& cfg) {
    if (cfg.participants.empty())
        throw std::invalid_argument("FederationConfig: no participants");
    if (cfg.rounds < 1) throw std::invalid_argument("FederationConfig: rounds must be >= 1");
    cfg.test_set.validate();
    if (cfg.test_set.size() == 0)
        throw std::invalid_argument("FederationConfig: empty test set");

    std::set<int> ids;
    for (const auto& p : cfg.participants) {
        if (!ids.insert(p.id).second)
            throw std::invalid_argument("FederationConfig: duplicate participant id");
        p.data.validate();
        if (p.data.dim() != cfg.test_set.dim() || p.data.num_classes != cfg.test_set.num_classes)
            throw std::invalid_argument("FederationConfig: participant data/task shape mismatch");
    }
    if (cfg.selection.kind == SelectionPolicy::Kind::uniform_random &&
        (cfg.selection.k < 1 ||
         cfg.selection.k > static_cast<int>(cfg.participants.size())))
        throw std::invalid_argument("FederationConfig: selection k out of range");
}

std::vector<int> sorted_ids(const FederationConfig& cfg) {
    std::vector<int> ids;
    ids.reserve(cfg.participants.size());
    for (const auto& p : cfg.participants) ids.push_back(p.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

ModelParams initialize(const FederationConfig& cfg) {
    const Eigen::Index num_classes = cfg.test_set.num_classes;
    const Eigen::Index dim = cfg.test_set.dim();
    Rng rng(derive_seed(cfg.seed, kInitSalt));
    ModelParams params = ModelParams::zero(num_classes, dim);
    for (Eigen::Index k = 0; k < num_classes; ++k)
        for (Eigen::Index j = 0; j < dim; ++j) params.weights(k, j) = rng.uniform(-0.01, 0.01);
    for (Eigen::Index k = 0; k < num_classes; ++k) params.biases[k] = rng.uniform(-0.01, 0.01);
    return params;
}

std::vector<int> select_participants(const FederationConfig& cfg, int round) {
    if (round < 1) throw std::invalid_argument("select_participants: round must be >= 1");
    std::vector<int> ids = sorted_ids(cfg);
    if (cfg.selection.kind == SelectionPolicy::Kind::all) return ids;

    if (cfg.selection.k > static_cast<int>(ids.size()))
        throw std::invalid_argument("select_participants: k exceeds population");
    Rng rng(derive_seed(cfg.selection.seed, static_cast<std::uint64_t>(round)));
    rng.shuffle(ids);
    ids.resize(static_cast<std::size_t>(cfg.selection.k));
    return ids;
}

Update produce_update(const ParticipantSpec& spec, const ModelParams& global, int round) {
    if (round < 1) throw std::invalid_argument("produce_update: round must be >= 1");

    // Per-round training seed, so local SGD differs across rounds but the
    // whole update stays a pure function of (spec, global, round).
    TrainConfig cfg = spec.train_cfg;
    cfg.seed = derive_seed(spec.train_cfg.seed, static_cast<std::uint64_t>(round));

    Update update;
    update.participant_id = spec.id;
    update.round = round;
    update.reported_data_size = spec.data.size();

    update.params = std::visit(
        [&](const auto& behavior) -> ModelParams {
            using T = std::decay_t<decltype(behavior)>;
            if constexpr (std::is_same_v<T, Honest>) {
                return train_local(spec.data, global, cfg);
            } else if constexpr (std::is_same_v<T, FlipSpec>) {
                FlipSpec flip = behavior;
                if (flip.reflip_each_round)
                    flip.seed = derive_seed(behavior.seed, static_cast<std::uint64_t>(round));
                return train_local(flip_labels(spec.data, flip), global, cfg);
            } else if constexpr (std::is_same_v<T, FreeRiderStrategy>) {
                // No training happens; the reported size is the lie.
                return free_rider_update(behavior, global, round);
            } else {
                return poison_update(behavior, train_local(spec.data, global, cfg));
            }
        },
        spec.behavior);
    return update;
}

ModelParams aggregate(const std::vector<Update>& updates, Weighting weighting) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");

    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return updates[a].participant_id < updates[b].participant_id;
    });

    const Eigen::Index num_classes = updates[order[0]].params.num_classes();
    const Eigen::Index dim = updates[order[0]].params.dim();
    double total_size = 0.0;
    for (const auto& u : updates) {
        if (u.params.num_classes() != num_classes || u.params.dim() != dim)
            throw std::invalid_argument("aggregate: update dimension mismatch");
        if (u.reported_data_size < 0)
            throw std::invalid_argument("aggregate: negative reported data size");
        total_size += static_cast<double>(u.reported_data_size);
    }
    if (weighting == Weighting::data_size && total_size <= 0.0)
        throw std::invalid_argument("aggregate: all reported data sizes are zero");

    ModelParams result = ModelParams::zero(num_classes, dim);
    for (const std::size_t idx : order) {
        const Update& u = updates[idx];
        const double w = weighting == Weighting::uniform
                             ? 1.0 / static_cast<double>(updates.size())
                             : static_cast<double>(u.reported_data_size) / total_size;
        result.weights += w * u.params.weights;
        result.biases += w * u.params.biases;
    }
    return result;
}

std::vector<RoundRecord> run_federation(const FederationConfig& cfg) {
    validate_config(cfg);

    ModelParams global = initialize(cfg);
    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.rounds));

    for (int round = 1; round <= cfg.rounds; ++round) {
        RoundRecord record;
        record.round = round;
        record.selected_ids = select_participants(cfg, round);
        std::sort(record.selected_ids.begin(), record.selected_ids.end());
        record.global_before = global;

        // Updates are produced and merged in ascending id order; with pure
        // produce_update this matches any parallel schedule.
        for (const int id : record.selected_ids) {
            const auto spec = std::find_if(cfg.participants.begin(), cfg.participants.end(),
                                           [id](const ParticipantSpec& p) { return p.id == id; });
            record.updates.push_back(produce_update(*spec, global, round));
        }

        record.global_after = aggregate(record.updates, cfg.weighting);
        record.global_accuracy = evaluate(record.global_after, cfg.test_set);
        global = record.global_after;
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace fedsim
