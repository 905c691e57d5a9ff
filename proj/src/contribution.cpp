#include "fedsim/contribution.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::influence: return "influence";
        case Scheme::reputation: return "reputation";
        case Scheme::shapley_exact: return "shapley_exact";
        case Scheme::shapley_sampled: return "shapley_sampled";
        case Scheme::self_reported: return "self_reported";
    }
    throw std::logic_error("scheme_name: unreachable");
}

Scheme scheme_from_name(const std::string& name) {
    for (const Scheme s : {Scheme::influence, Scheme::reputation, Scheme::shapley_exact,
                           Scheme::shapley_sampled, Scheme::self_reported}) {
        if (name == scheme_name(s)) return s;
    }
    throw std::invalid_argument("unknown scheme: " + name);
}

CoalitionValue::CoalitionValue(std::vector<int> ids,
                               std::function<double(const std::vector<int>&)> value)
    : ids_(std::move(ids)), value_(std::move(value)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
        throw std::invalid_argument("CoalitionValue: duplicate ids");
    if (ids_.size() > 63) throw std::invalid_argument("CoalitionValue: too many players");
}

double CoalitionValue::operator()(const std::vector<int>& subset) const {
    std::uint64_t mask = 0;
    for (const int id : subset) {
        const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id)
            throw std::out_of_range("CoalitionValue: unknown id in subset");
        mask |= std::uint64_t{1} << (it - ids_.begin());
    }
    return at_mask(mask);
}

double CoalitionValue::at_mask(std::uint64_t mask) const {
    if (mask >> ids_.size()) throw std::out_of_range("CoalitionValue: mask out of range");
    const auto cached = memo_.find(mask);
    if (cached != memo_.end()) return cached->second;

    std::vector<int> subset;
    subset.reserve(static_cast<std::size_t>(std::popcount(mask)));
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) subset.push_back(ids_[i]);
    const double v = value_(subset);
    memo_.emplace(mask, v);
    return v;
}

CoalitionValue round_coalition_value(const RoundRecord& record, const Dataset& test,
                                     Weighting weighting) {
    std::vector<int> ids;
    ids.reserve(record.updates.size());
    for (const auto& u : record.updates) ids.push_back(u.participant_id);

    // The oracle owns copies of the round's updates, the pre-round model and
    // the test set, so it stays valid independent of the record's lifetime.
    // v(empty) is the incoming global model's accuracy.
    return CoalitionValue(
        std::move(ids), [updates = record.updates, before = record.global_before, test,
                         weighting](const std::vector<int>& subset) {
            if (subset.empty()) return evaluate(before, test);
            std::vector<Update> members;
            members.reserve(subset.size());
            for (const auto& u : updates)
                if (std::find(subset.begin(), subset.end(), u.participant_id) != subset.end())
                    members.push_back(u);
            return evaluate(aggregate(members, weighting), test);
        });
}

double influence(const CoalitionValue& value, int participant) {
    const auto& ids = value.ids();
    const auto it = std::lower_bound(ids.begin(), ids.end(), participant);
    if (it == ids.end() || *it != participant)
        throw std::out_of_range("influence: participant not in round");
    if (ids.size() < 2)
        throw std::invalid_argument("influence: round must have at least two participants");
    const std::uint64_t full = (std::uint64_t{1} << ids.size()) - 1;
    const std::uint64_t without = full & ~(std::uint64_t{1} << (it - ids.begin()));
    return value.at_mask(full) - value.at_mask(without);
}

double influence(const RoundRecord& record, int participant, const Dataset& test,
                 Weighting weighting) {
    return influence(round_coalition_value(record, test, weighting), participant);
}

double reputation(const std::vector<double>& influence_series, int ts) {
    if (ts < 1) throw std::invalid_argument("reputation: ts must be >= 1");
    if (static_cast<int>(influence_series.size()) < ts)
        throw std::invalid_argument("reputation: fewer than ts slots available");
    double sum = 0.0;
    for (std::size_t i = influence_series.size() - static_cast<std::size_t>(ts);
         i < influence_series.size(); ++i)
        sum += heaviside(influence_series[i]);
    return sum / static_cast<double>(ts);
}

namespace {

constexpr int kShapleyExactCap = 12;

std::array<double, kShapleyExactCap + 1> factorials() {
    std::array<double, kShapleyExactCap + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kShapleyExactCap; ++i) f[i] = f[i - 1] * i;
    return f;
}

}  // namespace

std::map<int, double> shapley_exact(const CoalitionValue& value) {
    const auto& ids = value.ids();
    const int n = static_cast<int>(ids.size());
    if (n == 0) return {};
    if (n > kShapleyExactCap)
        throw std::invalid_argument("shapley_exact: more than 12 players");

    const auto fact = factorials();
    // weight for |S| = s: s! (n - s - 1)! / n!
    std::array<double, kShapleyExactCap> weight{};
    for (int s = 0; s < n; ++s) weight[s] = fact[s] * fact[n - s - 1] / fact[n];

    std::map<int, double> sv;
    for (const int id : ids) sv[id] = 0.0;

    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 0; mask <= full; ++mask) {
        const int size = std::popcount(mask);
        if (size == n) continue;
        const double v_without = value.at_mask(mask);
        for (int i = 0; i < n; ++i) {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if (mask & bit) continue;
            sv[ids[static_cast<std::size_t>(i)]] +=
                weight[size] * (value.at_mask(mask | bit) - v_without);
        }
    }
    return sv;
}

std::map<int, double> shapley_sampled(const CoalitionValue& value, int num_permutations,
                                      std::uint64_t seed) {
    if (num_permutations < 1)
        throw std::invalid_argument("shapley_sampled: num_permutations must be >= 1");
    const auto& ids = value.ids();
    std::map<int, double> sv;
    for (const int id : ids) sv[id] = 0.0;
    if (ids.empty()) return sv;

    Rng rng(seed);
    std::vector<int> positions(ids.size());
    std::iota(positions.begin(), positions.end(), 0);

    for (int t = 0; t < num_permutations; ++t) {
        rng.shuffle(positions);
        std::uint64_t mask = 0;
        double prev = value.at_mask(mask);
        for (const int pos : positions) {
            mask |= std::uint64_t{1} << pos;
            const double cur = value.at_mask(mask);
            sv[ids[static_cast<std::size_t>(pos)]] += cur - prev;
            prev = cur;
        }
    }
    for (auto& [id, score] : sv) score /= static_cast<double>(num_permutations);
    return sv;
}

std::map<int, double> shapley_all_orders(const CoalitionValue& value) {
    const auto& ids = value.ids();
    const int n = static_cast<int>(ids.size());
    if (n == 0) return {};
    if (n > 8) throw std::invalid_argument("shapley_all_orders: more than 8 players");

    std::map<int, double> sv;
    for (const int id : ids) sv[id] = 0.0;

    std::vector<int> positions(ids.size());
    std::iota(positions.begin(), positions.end(), 0);
    std::uint64_t orders = 0;
    do {
        std::uint64_t mask = 0;
        double prev = value.at_mask(mask);
        for (const int pos : positions) {
            mask |= std::uint64_t{1} << pos;
            const double cur = value.at_mask(mask);
            sv[ids[static_cast<std::size_t>(pos)]] += cur - prev;
            prev = cur;
        }
        ++orders;
    } while (std::next_permutation(positions.begin(), positions.end()));

    for (auto& [id, score] : sv) score /= static_cast<double>(orders);
    return sv;
}

double self_reported_score(const Update& update) {
    return static_cast<double>(update.reported_data_size);
}

ContributionScore score_records(const std::vector<RoundRecord>& records, const Dataset& test,
                                Weighting weighting, Scheme scheme,
                                const ScoreOptions& options) {
    if (records.empty()) throw std::invalid_argument("score_records: no rounds");

    ContributionScore result;
    result.scheme = scheme;

    // Per-participant series of per-round scores, in round order over the
    // rounds where the participant was selected.
    std::map<int, std::vector<double>> series;

    for (const auto& record : records) {
        switch (scheme) {
            case Scheme::influence:
            case Scheme::reputation: {
                const CoalitionValue value = round_coalition_value(record, test, weighting);
                for (const auto& u : record.updates)
                    series[u.participant_id].push_back(influence(value, u.participant_id));
                break;
            }
            case Scheme::shapley_exact: {
                for (const auto& [id, score] :
                     shapley_exact(round_coalition_value(record, test, weighting)))
                    series[id].push_back(score);
                break;
            }
            case Scheme::shapley_sampled: {
                const auto scores = shapley_sampled(
                    round_coalition_value(record, test, weighting), options.shapley_permutations,
                    derive_seed(options.shapley_seed, static_cast<std::uint64_t>(record.round)));
                for (const auto& [id, score] : scores) series[id].push_back(score);
                break;
            }
            case Scheme::self_reported: {
                for (const auto& u : record.updates)
                    series[u.participant_id].push_back(self_reported_score(u));
                break;
            }
        }
    }

    for (const auto& [id, values] : series) {
        if (scheme == Scheme::reputation) {
            result.scores[id] = reputation(values, options.ts);
        } else {
            result.scores[id] =
                std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
        }
    }
    return result;
}

}  // namespace fedsim
