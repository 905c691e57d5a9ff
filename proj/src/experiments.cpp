#include "fedsim/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr std::uint64_t kDataSalt = 0x64617461;   // "data"
constexpr std::uint64_t kTrainSalt = 0x7472616e;  // "tran"
constexpr std::uint64_t kFlipSalt = 0x666c6970;   // "flip"
constexpr std::uint64_t kFedSalt = 0x66656465;    // "fede"
constexpr std::uint64_t kShapSalt = 0x73686170;   // "shap"

struct Cell {
    int attacker_count = 0;
    double flip_prob = 0.0;
};

std::vector<Cell> grid_cells(const ExperimentGrid& grid) {
    std::vector<Cell> cells;
    for (const int attackers : grid.attacker_counts) {
        if (attackers == 0) {
            cells.push_back({0, 0.0});
        } else {
            for (const double p : grid.flip_probs) cells.push_back({attackers, p});
        }
    }
    return cells;
}

std::string cell_label(const Cell& cell, std::uint64_t seed) {
    std::ostringstream os;
    os << "cell attacker_count=" << cell.attacker_count << " flip_prob=" << cell.flip_prob
       << " seed=" << seed;
    return os.str();
}

FederationConfig build_federation(const ExperimentGrid& grid, const Cell& cell,
                                  std::uint64_t seed) {
    const TaskParams& task = grid.task;
    const Eigen::Index total =
        static_cast<Eigen::Index>(grid.num_users) * task.samples_per_user + task.test_samples;
    const int per_class =
        static_cast<int>((total + task.num_classes - 1) / task.num_classes);

    // One pool per seed, shared by every cell: shards and the federator test
    // set come from the same distribution and the same draw.
    const Dataset pool = make_synthetic_task(task.num_classes, task.dim, per_class,
                                             derive_seed(seed, kDataSalt));

    FederationConfig cfg;
    cfg.rounds = grid.rounds;
    cfg.weighting = grid.weighting;
    cfg.seed = derive_seed(seed, kFedSalt);
    cfg.test_set =
        pool.slice(static_cast<Eigen::Index>(grid.num_users) * task.samples_per_user,
                   task.test_samples);

    for (int u = 0; u < grid.num_users; ++u) {
        ParticipantSpec spec;
        spec.id = u;
        spec.data = pool.slice(static_cast<Eigen::Index>(u) * task.samples_per_user,
                               task.samples_per_user);
        spec.train_cfg = grid.train;
        spec.train_cfg.seed = derive_seed(seed, kTrainSalt, static_cast<std::uint64_t>(u));
        if (u < cell.attacker_count) {
            FlipSpec flip;
            flip.p = cell.flip_prob;
            flip.seed = derive_seed(seed, kFlipSalt, static_cast<std::uint64_t>(u));
            spec.behavior = flip;
        }
        cfg.participants.push_back(std::move(spec));
    }
    return cfg;
}

void run_cell_seed(const ExperimentGrid& grid, const Cell& cell, std::uint64_t seed,
                   std::vector<ResultRow>& rows) {
    const FederationConfig cfg = build_federation(grid, cell, seed);
    const std::vector<RoundRecord> records = run_federation(cfg);
    const double final_accuracy = records.back().global_accuracy;

    for (const Scheme scheme : grid.schemes) {
        ScoreOptions options;
        options.ts = grid.ts;
        options.shapley_permutations = grid.shapley_permutations;
        options.shapley_seed = derive_seed(seed, kShapSalt);

        const auto t0 = std::chrono::steady_clock::now();
        const ContributionScore score =
            score_records(records, cfg.test_set, grid.weighting, scheme, options);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        for (const auto& [id, value] : score.scores) {
            ResultRow row;
            row.seed = seed;
            row.scheme = scheme;
            row.attacker_count = cell.attacker_count;
            row.flip_prob = cell.flip_prob;
            row.participant_id = id;
            row.is_attacker = id < cell.attacker_count;
            row.mean_score = value;
            row.final_global_accuracy = final_accuracy;
            row.wall_time_ms = ms;
            rows.push_back(row);
        }
    }
}

std::vector<ResultRow> run_cell(const ExperimentGrid& grid, const Cell& cell) {
    std::vector<ResultRow> rows;
    for (const std::uint64_t seed : grid.seeds) {
        try {
            run_cell_seed(grid, cell, seed, rows);
        } catch (const std::exception& e) {
            throw std::runtime_error(cell_label(cell, seed) + ": " + e.what());
        }
    }
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

constexpr const char* kRowHeader =
    "seed,scheme,attacker_count,flip_prob,participant_id,is_attacker,mean_score,"
    "final_global_accuracy";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

void ExperimentGrid::validate() const {
    if (num_users < 1) throw std::invalid_argument("grid: num_users must be >= 1");
    if (attacker_counts.empty()) throw std::invalid_argument("grid: no attacker counts");
    for (const int a : attacker_counts) {
        if (a < 0) throw std::invalid_argument("grid: attacker_count must be >= 0");
        if (a != 0 && a >= num_users)
            throw std::invalid_argument("grid: need at least one honest user per cell");
    }
    bool needs_flip_probs = false;
    for (const int a : attacker_counts) needs_flip_probs |= a > 0;
    if (needs_flip_probs && flip_probs.empty())
        throw std::invalid_argument("grid: no flip probabilities");
    for (const double p : flip_probs)
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("grid: flip_prob outside [0, 1]");
    if (schemes.empty()) throw std::invalid_argument("grid: no schemes");
    if (seeds.empty()) throw std::invalid_argument("grid: no seeds");
    if (rounds < 1) throw std::invalid_argument("grid: rounds must be >= 1");
    if (ts < 1 || ts > rounds) throw std::invalid_argument("grid: ts must be in [1, rounds]");
    if (task.num_classes < 2) throw std::invalid_argument("grid: num_classes must be >= 2");
    if (task.dim < 1) throw std::invalid_argument("grid: dim must be >= 1");
    if (task.samples_per_user < 1)
        throw std::invalid_argument("grid: samples_per_user must be >= 1");
    if (task.test_samples < 1) throw std::invalid_argument("grid: test_samples must be >= 1");
    if (!(train.learning_rate > 0.0))
        throw std::invalid_argument("grid: learning_rate must be positive");
    if (train.epochs < 1) throw std::invalid_argument("grid: epochs must be >= 1");
    if (train.batch_size < 1 || train.batch_size > task.samples_per_user)
        throw std::invalid_argument("grid: batch_size must be in [1, samples_per_user]");
    if (shapley_permutations < 1)
        throw std::invalid_argument("grid: shapley_permutations must be >= 1");
}

std::vector<ResultRow> run_grid(const ExperimentGrid& grid, int parallelism) {
    grid.validate();
    if (parallelism < 1) throw std::invalid_argument("run_grid: parallelism must be >= 1");

    const std::vector<Cell> cells = grid_cells(grid);
    std::vector<std::vector<ResultRow>> per_cell(cells.size());
    std::vector<std::string> errors(cells.size());

    const auto worker_body = [&](std::size_t cell_index) {
        try {
            per_cell[cell_index] = run_cell(grid, cells[cell_index]);
        } catch (const std::exception& e) {
            errors[cell_index] = e.what();  // already carries the cell label
        }
    };

    if (parallelism == 1 || cells.size() == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) worker_body(i);
    } else {
        std::atomic<std::size_t> next{0};
        const std::size_t threads =
            std::min<std::size_t>(static_cast<std::size_t>(parallelism), cells.size());
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1))
                    worker_body(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& error : errors)
        if (!error.empty()) throw std::runtime_error(error);

    // Rows were buffered per cell; concatenating in cell order keeps the
    // output independent of the thread schedule.
    std::vector<ResultRow> rows;
    for (auto& cell_rows : per_cell)
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("summarize: no rows");

    struct Bucket {
        double honest_sum = 0.0;
        std::size_t honest_count = 0;
        double attacker_sum = 0.0;
        std::size_t attacker_count = 0;
        double accuracy_sum = 0.0;
        std::size_t rows = 0;
    };
    std::map<std::tuple<int, int, double>, Bucket> buckets;  // (scheme, attackers, p)

    for (const auto& row : rows) {
        Bucket& b =
            buckets[{static_cast<int>(row.scheme), row.attacker_count, row.flip_prob}];
        if (row.is_attacker) {
            b.attacker_sum += row.mean_score;
            ++b.attacker_count;
        } else {
            b.honest_sum += row.mean_score;
            ++b.honest_count;
        }
        b.accuracy_sum += row.final_global_accuracy;
        ++b.rows;
    }

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SummaryRow> summary;
    for (const auto& [key, b] : buckets) {
        SummaryRow s;
        s.scheme = static_cast<Scheme>(std::get<0>(key));
        s.attacker_count = std::get<1>(key);
        s.flip_prob = std::get<2>(key);
        s.honest_mean =
            b.honest_count ? b.honest_sum / static_cast<double>(b.honest_count) : nan;
        s.attacker_mean =
            b.attacker_count ? b.attacker_sum / static_cast<double>(b.attacker_count) : nan;
        s.separation = s.honest_mean - s.attacker_mean;
        s.accuracy_mean = b.accuracy_sum / static_cast<double>(b.rows);
        summary.push_back(s);
    }
    return summary;
}

void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kRowHeader << '\n';
    for (const auto& r : rows) {
        out << r.seed << ',' << scheme_name(r.scheme) << ',' << r.attacker_count << ','
            << format_double(r.flip_prob) << ',' << r.participant_id << ','
            << (r.is_attacker ? 1 : 0) << ',' << format_double(r.mean_score) << ','
            << format_double(r.final_global_accuracy) << '\n';
    }
}

std::vector<ResultRow> read_rows_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("rows csv: empty input");
    if (line == std::string(kRowHeader) + "\r") line.pop_back();
    if (line != kRowHeader) throw std::invalid_argument("rows csv: unexpected header");

    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8)
            throw std::invalid_argument("rows csv: bad field count on line " +
                                        std::to_string(line_no));
        try {
            ResultRow r;
            r.seed = std::stoull(fields[0]);
            r.scheme = scheme_from_name(fields[1]);
            r.attacker_count = std::stoi(fields[2]);
            r.flip_prob = std::stod(fields[3]);
            r.participant_id = std::stoi(fields[4]);
            r.is_attacker = std::stoi(fields[5]) != 0;
            r.mean_score = std::stod(fields[6]);
            r.final_global_accuracy = std::stod(fields[7]);
            rows.push_back(r);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("rows csv: unparseable value on line " +
                                        std::to_string(line_no));
        }
    }
    return rows;
}

void write_rows_jsonl(std::ostream& out, const std::vector<ResultRow>& rows) {
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["seed"] = r.seed;
        j["scheme"] = scheme_name(r.scheme);
        j["attacker_count"] = r.attacker_count;
        j["flip_prob"] = r.flip_prob;
        j["participant_id"] = r.participant_id;
        j["is_attacker"] = r.is_attacker;
        j["mean_score"] = r.mean_score;
        j["final_global_accuracy"] = r.final_global_accuracy;
        out << j.dump() << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "scheme,attacker_count,flip_prob,honest_mean,attacker_mean,separation,"
           "accuracy_mean\n";
    for (const auto& s : rows) {
        out << scheme_name(s.scheme) << ',' << s.attacker_count << ','
            << format_double(s.flip_prob) << ',' << format_double(s.honest_mean) << ','
            << format_double(s.attacker_mean) << ',' << format_double(s.separation) << ','
            << format_double(s.accuracy_mean) << '\n';
    }
}

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known |= key == a;
        if (!known)
            throw std::invalid_argument("config: unknown key '" + scope + key + "'");
    }
}

}  // namespace

ExperimentGrid grid_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    ExperimentGrid grid;
    try {
        check_keys(j,
                   {"num_users", "attacker_counts", "flip_probs", "schemes", "seeds", "rounds",
                    "ts", "task", "train", "weighting", "shapley_permutations"},
                   "");
        if (j.contains("num_users")) grid.num_users = j["num_users"].get<int>();
        if (j.contains("attacker_counts"))
            grid.attacker_counts = j["attacker_counts"].get<std::vector<int>>();
        if (j.contains("flip_probs"))
            grid.flip_probs = j["flip_probs"].get<std::vector<double>>();
        if (j.contains("schemes")) {
            grid.schemes.clear();
            for (const auto& name : j["schemes"].get<std::vector<std::string>>())
                grid.schemes.push_back(scheme_from_name(name));
        }
        if (j.contains("seeds")) grid.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("rounds")) grid.rounds = j["rounds"].get<int>();
        if (j.contains("ts")) grid.ts = j["ts"].get<int>();
        if (j.contains("task")) {
            const json& t = j["task"];
            check_keys(t, {"num_classes", "dim", "samples_per_user", "test_samples"}, "task.");
            if (t.contains("num_classes")) grid.task.num_classes = t["num_classes"].get<int>();
            if (t.contains("dim")) grid.task.dim = t["dim"].get<int>();
            if (t.contains("samples_per_user"))
                grid.task.samples_per_user = t["samples_per_user"].get<int>();
            if (t.contains("test_samples"))
                grid.task.test_samples = t["test_samples"].get<int>();
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            check_keys(t, {"learning_rate", "epochs", "batch_size"}, "train.");
            if (t.contains("learning_rate"))
                grid.train.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("epochs")) grid.train.epochs = t["epochs"].get<int>();
            if (t.contains("batch_size")) grid.train.batch_size = t["batch_size"].get<int>();
        }
        if (j.contains("weighting")) {
            const auto w = j["weighting"].get<std::string>();
            if (w == "uniform") grid.weighting = Weighting::uniform;
            else if (w == "data_size") grid.weighting = Weighting::data_size;
            else throw std::invalid_argument("config: weighting must be uniform or data_size");
        }
        if (j.contains("shapley_permutations"))
            grid.shapley_permutations = j["shapley_permutations"].get<int>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    grid.validate();
    return grid;
}

ExperimentGrid default_grid() { return ExperimentGrid{}; }

}  // namespace fedsim
