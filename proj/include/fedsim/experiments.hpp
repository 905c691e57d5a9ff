#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedsim/contribution.hpp"

namespace fedsim {

struct TaskParams {
    int num_classes = 4;
    int dim = 8;
    int samples_per_user = 100;
    int test_samples = 4000;
};

/// Experiment grid: users x attacker counts x flip probabilities x schemes
/// x seeds. Attackers are label flippers occupying the lowest participant
/// ids; attacker_count 0 is a single baseline cell with no flip-prob sweep.
struct ExperimentGrid {
    int num_users = 4;
    std::vector<int> attacker_counts = {0, 1, 2, 3};
    std::vector<double> flip_probs = {0.1, 0.3, 0.5, 1.0};
    std::vector<Scheme> schemes = {Scheme::influence, Scheme::reputation,
                                   Scheme::shapley_exact};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int rounds = 10;
    int ts = 5;
    TaskParams task;
    TrainConfig train = {0.1, 2, 32, 0};  // seed is re-derived per user
    Weighting weighting = Weighting::data_size;
    int shapley_permutations = 200;

    void validate() const;  // throws std::invalid_argument
};

struct ResultRow {
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::influence;
    int attacker_count = 0;
    double flip_prob = 0.0;
    int participant_id = 0;
    bool is_attacker = false;
    double mean_score = 0.0;
    double final_global_accuracy = 0.0;
    // Scheme computation time. Diagnostic only: kept out of the CSV/JSONL
    // serializations so identical grids produce byte-identical files.
    double wall_time_ms = 0.0;
};

struct SummaryRow {
    Scheme scheme = Scheme::influence;
    int attacker_count = 0;
    double flip_prob = 0.0;
    double honest_mean = 0.0;
    double attacker_mean = 0.0;  // NaN for all-honest cells
    double separation = 0.0;     // honest_mean - attacker_mean; NaN likewise
    double accuracy_mean = 0.0;
};

/// Runs every cell x seed of the grid and emits one row per
/// (cell, seed, scheme, participant), in deterministic grid order. Cells may
/// run on up to `parallelism` threads; the output never depends on it.
/// A failing cell aborts the grid with the cell identified.
std::vector<ResultRow> run_grid(const ExperimentGrid& grid, int parallelism = 1);

/// Per (scheme, attacker_count, flip_prob): mean honest and attacker scores,
/// their separation, and mean final accuracy.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

// CSV / JSON-lines serialization. Floats carry 9 significant digits.
void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_rows_csv(std::istream& in);  // throws on malformed input
void write_rows_jsonl(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Parses an ExperimentGrid from JSON text. Keys mirror the struct fields;
/// omitted keys keep their defaults, unknown keys are an error.
ExperimentGrid grid_from_json(const std::string& text);

/// The desk-scale default grid mirrored by the `demo` subcommand.
ExperimentGrid default_grid();

}  // namespace fedsim
