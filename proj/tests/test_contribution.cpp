#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fedsim/contribution.hpp"
#include "fedsim/federation.hpp"
#include "test_support.hpp"

using namespace fedsim;
using namespace testsupport;

TEST_SUITE_BEGIN("contribution");

namespace {

RoundRecord one_round(const FederationConfig& cfg) {
    return run_federation(cfg).front();
}

}  // namespace

TEST_CASE("scheme names round-trip") {
    for (const Scheme s : {Scheme::influence, Scheme::reputation, Scheme::shapley_exact,
                           Scheme::shapley_sampled, Scheme::self_reported})
        CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK_THROWS_AS(scheme_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("coalition value: boundary subsets and memoization") {
    const FederationConfig cfg = standard_federation(0, 0.0, 3, 3, 1);
    const RoundRecord record = one_round(cfg);
    const CoalitionValue v = round_coalition_value(record, cfg.test_set, cfg.weighting);

    CHECK(v({0, 1, 2}) == record.global_accuracy);
    CHECK(v(std::vector<int>{}) == evaluate(record.global_before, cfg.test_set));
    CHECK(v({1}) == evaluate(record.updates[1].params, cfg.test_set));
    CHECK_THROWS_AS(v({7}), std::out_of_range);

    const std::size_t before = v.evaluations();
    v({0, 1, 2});
    v({0, 1, 2});
    CHECK(v.evaluations() == before);  // cached

    // All of shapley_exact costs exactly the 2^n distinct subsets.
    const CoalitionValue fresh = round_coalition_value(record, cfg.test_set, cfg.weighting);
    shapley_exact(fresh);
    CHECK(fresh.evaluations() == 8);
}

TEST_CASE("influence: identical updates contribute nothing under uniform weighting") {
    RoundRecord record;
    record.round = 1;
    record.global_before = ModelParams::zero(2, 2);
    const Dataset test = two_blob_dataset(40, 5);
    for (int id = 0; id < 3; ++id) {
        Update u;
        u.participant_id = id;
        u.round = 1;
        u.params = random_params(2, 2, 1.0, 9);  // same seed: identical params
        u.reported_data_size = 10;
        record.updates.push_back(u);
        record.selected_ids.push_back(id);
    }
    record.global_after = aggregate(record.updates, Weighting::uniform);
    record.global_accuracy = evaluate(record.global_after, test);

    for (int id = 0; id < 3; ++id)
        CHECK(influence(record, id, test, Weighting::uniform) == 0.0);
}

TEST_CASE("influence is bounded and undefined for singleton rounds") {
    const FederationConfig cfg = standard_federation(1, 1.0, 11, 4, 1);
    const RoundRecord record = one_round(cfg);
    for (int id = 0; id < 4; ++id) {
        const double inf = influence(record, id, cfg.test_set, cfg.weighting);
        CHECK(inf >= -1.0);
        CHECK(inf <= 1.0);
    }
    CHECK_THROWS_AS(influence(record, 9, cfg.test_set, cfg.weighting), std::out_of_range);

    const FederationConfig solo = standard_federation(0, 0.0, 11, 1, 1);
    const RoundRecord alone = one_round(solo);
    CHECK_THROWS_AS(influence(alone, 0, solo.test_set, solo.weighting),
                    std::invalid_argument);
}

TEST_CASE("a full-strength flipper earns less influence than honest users") {
    double flipper_sum = 0.0;
    double honest_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const FederationConfig cfg = standard_federation(1, 1.0, seed);
        const auto records = run_federation(cfg);
        const ContributionScore scores =
            score_records(records, cfg.test_set, cfg.weighting, Scheme::influence);
        flipper_sum += scores.scores.at(0);
        honest_sum += (scores.scores.at(1) + scores.scores.at(2) + scores.scores.at(3)) / 3.0;
    }
    CHECK(flipper_sum / 5.0 < honest_sum / 5.0);
}

TEST_CASE("reputation follows the Heaviside slot average") {
    CHECK(reputation({0.2, 0.1, 0.3, 0.2, 0.4}, 5) == 1.0);
    CHECK(reputation({-0.2, 0.0, -0.1, 0.0, -0.3}, 5) == 0.0);  // H(0) = 0
    CHECK(reputation({0.1, 0.2, -0.1, 0.3, -0.2}, 5) == doctest::Approx(0.6));
    // Only the last ts slots count.
    CHECK(reputation({-1.0, -1.0, 0.5, 0.5}, 2) == 1.0);
    CHECK_THROWS_AS(reputation({0.1, 0.2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(reputation({0.1}, 0), std::invalid_argument);
}

TEST_CASE("reputation scores land on the ts grid") {
    const FederationConfig cfg = standard_federation(1, 0.5, 21, 4, 6);
    const auto records = run_federation(cfg);
    ScoreOptions options;
    options.ts = 5;
    const ContributionScore rep =
        score_records(records, cfg.test_set, cfg.weighting, Scheme::reputation, options);
    for (const auto& [id, score] : rep.scores) {
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
        const double scaled = score * 5.0;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    }
}

TEST_CASE("shapley_exact reproduces the glove game") {
    const auto sv = shapley_exact(glove_game().oracle());
    CHECK(sv.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(sv.at(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(sv.at(3) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("shapley_exact: additive game gives everyone 1") {
    TableGame game;
    game.ids = {1, 2, 3, 4};
    game.worth.resize(16);
    for (std::uint64_t mask = 0; mask < 16; ++mask)
        game.worth[mask] = static_cast<double>(std::popcount(mask));
    for (const auto& [id, score] : shapley_exact(game.oracle()))
        CHECK(score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shapley axioms hold on random games") {
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 5;  // up to 6 players
        const TableGame game = random_game(n, 1000 + static_cast<std::uint64_t>(trial));
        const auto sv = shapley_exact(game.oracle());

        double total = 0.0;
        for (const auto& [id, score] : sv) total += score;
        const double grand = game.worth.back() - game.worth.front();
        CHECK(std::abs(total - grand) < 1e-9);  // efficiency
    }

    // Symmetry: v depends only on |S \ {1,2}| and |S & {1,2}|.
    {
        fedsim::Rng rng(5150);
        TableGame game;
        game.ids = {1, 2, 3, 4, 5};
        game.worth.resize(32);
        double table[4][3];
        for (auto& row : table)
            for (auto& cell : row) cell = rng.uniform(-1.0, 1.0);
        for (std::uint64_t mask = 0; mask < 32; ++mask) {
            const int pair = static_cast<int>((mask & 1) + ((mask >> 1) & 1));
            const int rest = std::popcount(mask >> 2);
            game.worth[mask] = table[rest][pair];
        }
        const auto sv = shapley_exact(game.oracle());
        CHECK(std::abs(sv.at(1) - sv.at(2)) < 1e-9);
    }

    // Dummy: v ignores player 1 entirely.
    {
        fedsim::Rng rng(6160);
        TableGame game;
        game.ids = {1, 2, 3, 4};
        game.worth.resize(16);
        double base[8];
        for (auto& w : base) w = rng.uniform(-1.0, 1.0);
        for (std::uint64_t mask = 0; mask < 16; ++mask)
            game.worth[mask] = base[mask >> 1];  // drops player 1's bit
        const auto sv = shapley_exact(game.oracle());
        CHECK(std::abs(sv.at(1)) < 1e-9);
    }
}

TEST_CASE("shapley_exact rejects oversized and duplicate inputs") {
    std::vector<int> many(13);
    std::iota(many.begin(), many.end(), 0);
    const CoalitionValue big(many, [](const std::vector<int>&) { return 0.0; });
    CHECK_THROWS_AS(shapley_exact(big), std::invalid_argument);

    CHECK_THROWS_AS(CoalitionValue({1, 1, 2}, [](const std::vector<int>&) { return 0.0; }),
                    std::invalid_argument);
}

TEST_CASE("subset formula agrees with brute-force join-order averaging") {
    for (int n = 2; n <= 5; ++n) {
        const TableGame game = random_game(n, 9000 + static_cast<std::uint64_t>(n));
        const auto brute = brute_force_shapley(game);
        const auto fast = shapley_exact(game.oracle());
        for (const auto& [id, score] : brute)
            CHECK(std::abs(score - fast.at(id)) < 1e-9);
    }
}

TEST_CASE("shapley_all_orders equals shapley_exact") {
    const auto exact = shapley_exact(glove_game().oracle());
    const auto all_orders = shapley_all_orders(glove_game().oracle());
    for (const auto& [id, score] : exact)
        CHECK(std::abs(score - all_orders.at(id)) < 1e-9);
}

TEST_CASE("sampled shapley: convergence on the glove game") {
    const auto exact = shapley_exact(glove_game().oracle());

    SUBCASE("20000 permutations land within 0.02 of exact") {
        const auto sampled = shapley_sampled(glove_game().oracle(), 20000, 31337);
        for (const auto& [id, score] : exact) CHECK(std::abs(sampled.at(id) - score) <= 0.02);
    }

    SUBCASE("doubling the sample count does not increase mean deviation") {
        const auto mean_deviation = [&](int permutations) {
            double sum = 0.0;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                const auto sampled =
                    shapley_sampled(glove_game().oracle(), permutations, seed);
                double dev = 0.0;
                for (const auto& [id, score] : exact)
                    dev = std::max(dev, std::abs(sampled.at(id) - score));
                sum += dev;
            }
            return sum / 20.0;
        };
        CHECK(mean_deviation(1000) <= mean_deviation(500));
    }

    SUBCASE("constant games sample to exactly zero") {
        TableGame constant;
        constant.ids = {1, 2, 3};
        constant.worth.assign(8, 0.4);
        for (const auto& [id, score] : shapley_sampled(constant.oracle(), 50, 7))
            CHECK(score == 0.0);
    }

    SUBCASE("sampling is deterministic per seed") {
        const auto a = shapley_sampled(glove_game().oracle(), 100, 5);
        const auto b = shapley_sampled(glove_game().oracle(), 100, 5);
        CHECK(a == b);
        CHECK_THROWS_AS(shapley_sampled(glove_game().oracle(), 0, 5), std::invalid_argument);
    }
}

TEST_CASE("self-reported scores echo the declared size, blind to quality") {
    Update honest;
    honest.reported_data_size = 6000;
    CHECK(self_reported_score(honest) == 6000.0);

    Update empty;
    empty.reported_data_size = 0;
    CHECK(self_reported_score(empty) == 0.0);

    // A free rider reporting 6000 with garbage params scores exactly the same.
    Update rider;
    rider.reported_data_size = 6000;
    rider.params = random_params(4, 8, 10.0, 2);
    CHECK(self_reported_score(rider) == self_reported_score(honest));
}

TEST_CASE("score_records covers each selected participant exactly once") {
    const FederationConfig cfg = standard_federation(1, 1.0, 23, 4, 6);
    const auto records = run_federation(cfg);
    ScoreOptions options;
    options.ts = 5;
    options.shapley_permutations = 40;
    options.shapley_seed = 9;

    for (const Scheme scheme : {Scheme::influence, Scheme::reputation, Scheme::shapley_exact,
                                Scheme::shapley_sampled, Scheme::self_reported}) {
        const ContributionScore score =
            score_records(records, cfg.test_set, cfg.weighting, scheme, options);
        CHECK(score.scores.size() == 4);
        CHECK(score.scheme == scheme);
    }

    CHECK_THROWS_AS(score_records({}, cfg.test_set, cfg.weighting, Scheme::influence),
                    std::invalid_argument);
}

TEST_SUITE_END();
