#include "fedsim/incentive.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedsim {

RewardAllocation allocate_rewards(const ContributionScore& scores, double budget,
                                  ZeroScorePolicy policy, int first_round, int last_round) {
    if (scores.scores.empty())
        throw std::invalid_argument("allocate_rewards: no scored participants");
    if (budget < 0.0) throw std::invalid_argument("allocate_rewards: negative budget");

    RewardAllocation allocation;
    allocation.scheme = scores.scheme;
    allocation.first_round = first_round;
    allocation.last_round = last_round;

    double total = 0.0;
    for (const auto& [id, score] : scores.scores) total += std::max(score, 0.0);

    for (const auto& [id, score] : scores.scores) {
        double reward = 0.0;
        if (total > 0.0) {
            reward = budget * std::max(score, 0.0) / total;
        } else if (policy == ZeroScorePolicy::equal_split) {
            reward = budget / static_cast<double>(scores.scores.size());
        }
        allocation.rewards[id] = reward;
    }
    return allocation;
}

bool verify_monotone(const RewardAllocation& allocation, const ContributionScore& scores,
                     const RewardValueFn& value_fn) {
    if (allocation.rewards.size() != scores.scores.size())
        throw std::invalid_argument("verify_monotone: participant sets differ");
    for (const auto& [id, reward] : allocation.rewards) {
        if (!scores.scores.count(id))
            throw std::invalid_argument("verify_monotone: participant sets differ");
        (void)reward;
    }

    for (const auto& [id_a, score_a] : scores.scores) {
        for (const auto& [id_b, score_b] : scores.scores) {
            if (score_a > score_b &&
                value_fn.value(allocation.rewards.at(id_a)) <
                    value_fn.value(allocation.rewards.at(id_b)))
                return false;
        }
    }
    return true;
}

}  // namespace fedsim
