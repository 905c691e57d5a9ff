#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fedsim/experiments.hpp"

using namespace fedsim;

TEST_SUITE_BEGIN("experiments");

namespace {

// Small grid that exercises the full pipeline in well under a second.
ExperimentGrid small_grid() {
    ExperimentGrid grid;
    grid.num_users = 3;
    grid.attacker_counts = {0, 1};
    grid.flip_probs = {1.0};
    grid.schemes = {Scheme::influence, Scheme::self_reported};
    grid.seeds = {1, 2};
    grid.rounds = 3;
    grid.ts = 2;
    grid.task = {3, 4, 60, 90};
    grid.train = {0.1, 1, 20, 0};
    return grid;
}

}  // namespace

TEST_CASE("row count matches the cell-cardinality formula") {
    const ExperimentGrid grid = small_grid();
    const auto rows = run_grid(grid);
    // cells = 1 (no attackers) + 1 attacker count x 1 flip prob = 2
    const std::size_t expected = 2u * grid.seeds.size() * grid.schemes.size() *
                                 static_cast<std::size_t>(grid.num_users);
    CHECK(rows.size() == expected);

    // The default demo grid: 4 users * (1 + 3*4 cells) * 3 schemes * 5 seeds = 780 rows.
    const ExperimentGrid demo = default_grid();
    std::size_t cells = 0;
    for (const int a : demo.attacker_counts)
        cells += a == 0 ? 1 : demo.flip_probs.size();
    CHECK(4u * cells * demo.schemes.size() * demo.seeds.size() == 780u);
}

TEST_CASE("attacker labeling marks exactly the flipper ids") {
    const auto rows = run_grid(small_grid());
    for (const auto& row : rows) {
        CHECK(row.is_attacker == (row.participant_id < row.attacker_count));
        if (row.attacker_count == 0) CHECK_FALSE(row.is_attacker);
    }
}

TEST_CASE("grid output is deterministic and independent of parallelism") {
    const ExperimentGrid grid = small_grid();
    const auto a = run_grid(grid, 1);
    const auto b = run_grid(grid, 1);
    const auto c = run_grid(grid, 4);

    std::ostringstream csv_a, csv_b, csv_c;
    write_rows_csv(csv_a, a);
    write_rows_csv(csv_b, b);
    write_rows_csv(csv_c, c);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(csv_a.str() == csv_c.str());
}

TEST_CASE("rows survive a CSV round trip") {
    const auto rows = run_grid(small_grid());
    std::ostringstream out;
    write_rows_csv(out, rows);

    std::istringstream in(out.str());
    const auto parsed = read_rows_csv(in);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i].seed == rows[i].seed);
        CHECK(parsed[i].scheme == rows[i].scheme);
        CHECK(parsed[i].attacker_count == rows[i].attacker_count);
        CHECK(parsed[i].participant_id == rows[i].participant_id);
        CHECK(parsed[i].is_attacker == rows[i].is_attacker);
        CHECK(parsed[i].mean_score ==
              doctest::Approx(rows[i].mean_score).epsilon(1e-8));
    }

    std::istringstream garbage("not,a,header\n");
    CHECK_THROWS_AS(read_rows_csv(garbage), std::invalid_argument);
    std::istringstream short_line(out.str().substr(0, out.str().find('\n') + 1) + "1,2\n");
    CHECK_THROWS_AS(read_rows_csv(short_line), std::invalid_argument);
}

TEST_CASE("jsonl mirror carries one object per row") {
    const auto rows = run_grid(small_grid());
    std::ostringstream out;
    write_rows_jsonl(out, rows);
    std::size_t lines = 0;
    std::string line;
    std::istringstream in(out.str());
    while (std::getline(in, line)) {
        CHECK(line.front() == '{');
        CHECK(line.find("\"seed\"") != std::string::npos);
        ++lines;
    }
    CHECK(lines == rows.size());
}

TEST_CASE("summarize separates honest and attacker means") {
    std::vector<ResultRow> rows;
    ResultRow honest;
    honest.scheme = Scheme::influence;
    honest.attacker_count = 1;
    honest.flip_prob = 1.0;
    honest.participant_id = 1;
    honest.mean_score = 0.8;
    honest.final_global_accuracy = 0.9;
    ResultRow attacker = honest;
    attacker.participant_id = 0;
    attacker.is_attacker = true;
    attacker.mean_score = 0.2;
    rows.push_back(honest);
    rows.push_back(attacker);

    const auto summary = summarize(rows);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].honest_mean == doctest::Approx(0.8));
    CHECK(summary[0].attacker_mean == doctest::Approx(0.2));
    CHECK(summary[0].separation == doctest::Approx(0.6));
    CHECK(summary[0].accuracy_mean == doctest::Approx(0.9));
}

TEST_CASE("summarize marks all-honest cells with NaN attacker stats") {
    ExperimentGrid grid = small_grid();
    grid.attacker_counts = {0};
    const auto summary = summarize(run_grid(grid));
    for (const auto& s : summary) {
        CHECK(std::isnan(s.attacker_mean));
        CHECK(std::isnan(s.separation));
        CHECK_FALSE(std::isnan(s.honest_mean));
    }

    std::ostringstream csv;
    write_summary_csv(csv, summary);
    CHECK(csv.str().find("nan") != std::string::npos);
}

TEST_CASE("config JSON: defaults, overrides, and strict keys") {
    const ExperimentGrid defaults = grid_from_json("{}");
    CHECK(defaults.num_users == 4);
    CHECK(defaults.rounds == 10);
    CHECK(defaults.schemes.size() == 3);

    const ExperimentGrid grid = grid_from_json(R"({
        "num_users": 3,
        "attacker_counts": [0, 2],
        "flip_probs": [0.5],
        "schemes": ["shapley_sampled", "self_reported"],
        "seeds": [7],
        "rounds": 4,
        "ts": 2,
        "task": {"num_classes": 3, "dim": 5, "samples_per_user": 50, "test_samples": 60},
        "train": {"learning_rate": 0.2, "epochs": 1, "batch_size": 10},
        "weighting": "uniform",
        "shapley_permutations": 32
    })");
    CHECK(grid.num_users == 3);
    CHECK(grid.schemes == std::vector<Scheme>{Scheme::shapley_sampled, Scheme::self_reported});
    CHECK(grid.weighting == Weighting::uniform);
    CHECK(grid.task.dim == 5);
    CHECK(grid.train.learning_rate == 0.2);

    CHECK_THROWS_AS(grid_from_json("{\"not_a_key\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("{\"task\": {\"bogus\": 1}}"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("{\"rounds\": \"ten\"}"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("{\"rounds\": 0}"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("{\"schemes\": [\"nope\"]}"), std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json("{\"weighting\": \"fancy\"}"), std::invalid_argument);
}

TEST_CASE("a failing cell aborts the grid and is identified") {
    ExperimentGrid grid = small_grid();
    grid.train.learning_rate = 1e308;  // passes validation, diverges at runtime
    try {
        run_grid(grid);
        FAIL("expected the grid to abort");
    } catch (const std::runtime_error& e) {
        const std::string message = e.what();
        CHECK(message.find("cell attacker_count=") != std::string::npos);
        CHECK(message.find("seed=") != std::string::npos);
    }
}

TEST_CASE("grid validation catches inconsistent settings") {
    ExperimentGrid all_attackers = small_grid();
    all_attackers.attacker_counts = {3};  // no honest user left
    CHECK_THROWS_AS(all_attackers.validate(), std::invalid_argument);

    ExperimentGrid bad_ts = small_grid();
    bad_ts.ts = 99;
    CHECK_THROWS_AS(bad_ts.validate(), std::invalid_argument);

    ExperimentGrid bad_p = small_grid();
    bad_p.flip_probs = {1.5};
    CHECK_THROWS_AS(bad_p.validate(), std::invalid_argument);

    ExperimentGrid bad_batch = small_grid();
    bad_batch.train.batch_size = 10000;
    CHECK_THROWS_AS(bad_batch.validate(), std::invalid_argument);
}

TEST_SUITE_END();
