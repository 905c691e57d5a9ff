#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedsim/federation.hpp"

namespace fedsim {

enum class Scheme { influence, reputation, shapley_exact, shapley_sampled, self_reported };

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);  // throws std::invalid_argument

/// Per-participant contribution scores from one measurement scheme.
struct ContributionScore {
    Scheme scheme = Scheme::influence;
    std::map<int, double> scores;
};

/// Memoizing coalition-value oracle v(S) over a fixed player set. Each
/// distinct subset is evaluated at most once; repeated queries return the
/// cached value, so the oracle is deterministic by construction.
class CoalitionValue {
public:
    /// `ids` are the players (duplicates rejected, at most 63 players);
    /// `value` maps a subset of ids, sorted ascending, to its worth. It must
    /// accept the empty subset.
    CoalitionValue(std::vector<int> ids, std::function<double(const std::vector<int>&)> value);

    /// Value of a subset given as ids. Unknown ids throw std::out_of_range.
    double operator()(const std::vector<int>& subset) const;

    /// Value of a subset given as a bitmask over ids() positions.
    double at_mask(std::uint64_t mask) const;

    const std::vector<int>& ids() const { return ids_; }
    std::size_t evaluations() const { return memo_.size(); }

private:
    std::vector<int> ids_;  // ascending
    std::function<double(const std::vector<int>&)> value_;
    mutable std::unordered_map<std::uint64_t, double> memo_;
};

/// Coalition value of one round: v(S) is the test accuracy of the model
/// aggregated from the subset S of that round's updates; v(empty) is the
/// accuracy of the pre-round global model, so marginals measure improvement
/// over the incoming model.
CoalitionValue round_coalition_value(const RoundRecord& record, const Dataset& test,
                                     Weighting weighting);

/// Leave-one-out influence: v(F) - v(F \ {i}). Requires at least two
/// updates in the round; a single-participant round is an error.
double influence(const CoalitionValue& value, int participant);
double influence(const RoundRecord& record, int participant, const Dataset& test,
                 Weighting weighting);

/// Heaviside step with H(0) = 0: a tie is no demonstrated improvement.
inline double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// Mean of H(influence) over the last `ts` slots of the series, in [0, 1].
/// Requires at least ts recorded slots.
double reputation(const std::vector<double>& influence_series, int ts);

/// Exact Shapley values by the subset-sum formula
///   SV_i = sum over S subset of F\{i} of |S|!(n-|S|-1)!/n! * (v(S+i) - v(S)).
/// Player count is capped at 12; the oracle is consulted once per subset.
std::map<int, double> shapley_exact(const CoalitionValue& value);

/// Monte-Carlo Shapley: mean marginal contribution over seeded
/// uniformly-random join orders. Deterministic per seed.
std::map<int, double> shapley_sampled(const CoalitionValue& value, int num_permutations,
                                      std::uint64_t seed);

/// Shapley values by exhaustive enumeration of all n! join orders
/// (n capped at 8). Equals shapley_exact up to rounding.
std::map<int, double> shapley_all_orders(const CoalitionValue& value);

/// Self-reported contribution: the participant's declared data size.
double self_reported_score(const Update& update);

struct ScoreOptions {
    int ts = 5;                   // reputation window, in rounds
    int shapley_permutations = 200;
    std::uint64_t shapley_seed = 0;
};

/// Applies one scheme to a full federation run. Per-round scores are
/// averaged over the rounds in which a participant was selected; reputation
/// uses the last `ts` of those rounds.
ContributionScore score_records(const std::vector<RoundRecord>& records, const Dataset& test,
                                Weighting weighting, Scheme scheme,
                                const ScoreOptions& options = {});

}  // namespace fedsim
