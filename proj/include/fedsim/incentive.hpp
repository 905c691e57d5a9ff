#pragma once

#include <functional>
#include <map>

#include "fedsim/contribution.hpp"

namespace fedsim {

/// v: R -> reals from the formal incentive mechanism (R, v, c, r). Rewards
/// here are scalar monetary amounts, so the default valuation is identity.
struct RewardValueFn {
    std::function<double(double)> value = [](double reward) { return reward; };
};

enum class ZeroScorePolicy {
    equal_split,  // all clamped scores zero: split the budget equally
    withhold      // all clamped scores zero: pay nothing
};

struct RewardAllocation {
    std::map<int, double> rewards;  // nonnegative, sum <= budget
    Scheme scheme = Scheme::influence;
    int first_round = 0;
    int last_round = 0;
};

/// Proportional reward function r: scores are clamped at zero, then the
/// budget is split as reward_i = budget * clamped_i / sum(clamped). Monotone
/// by construction: a higher score never earns a smaller reward.
RewardAllocation allocate_rewards(const ContributionScore& scores, double budget,
                                  ZeroScorePolicy policy = ZeroScorePolicy::equal_split,
                                  int first_round = 0, int last_round = 0);

/// True iff for every pair, score_i > score_j implies
/// v(reward_i) >= v(reward_j). Participant sets must match.
bool verify_monotone(const RewardAllocation& allocation, const ContributionScore& scores,
                     const RewardValueFn& value_fn = {});

}  // namespace fedsim
