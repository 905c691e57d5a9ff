#include "fedsim/dataset.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

Dataset Dataset::take(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.num_classes = num_classes;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::Index r = rows[i];
        if (r < 0 || r >= size()) throw std::out_of_range("Dataset::take: row out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
        out.labels[static_cast<Eigen::Index>(i)] = labels[r];
    }
    return out;
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index count) const {
    if (begin < 0 || count < 0 || begin + count > size())
        throw std::out_of_range("Dataset::slice: range out of bounds");
    Dataset out;
    out.num_classes = num_classes;
    out.features = features.middleRows(begin, count);
    out.labels = labels.segment(begin, count);
    return out;
}

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw std::invalid_argument("Dataset: row count must equal label count");
    if (num_classes < 1) throw std::invalid_argument("Dataset: num_classes must be >= 1");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw std::invalid_argument("Dataset: label out of [0, num_classes)");
    }
    if (!features.allFinite())
        throw std::invalid_argument("Dataset: features must be finite");
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Center spacing for unit-variance clusters such that the union bound on
// the Bayes error, (K-1) * Phi(-c/2), equals 10%: every task stays at or
// above 90% separability without saturating small-K tasks.
double center_spacing(int num_classes) {
    const double per_pair = 0.1 / static_cast<double>(num_classes - 1);
    double lo = 0.0;
    double hi = 20.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(-mid / 2.0) > per_pair ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Dataset make_synthetic_task(int num_classes, int dim, int samples_per_class,
                            std::uint64_t seed) {
    if (num_classes < 1 || dim < 1 || samples_per_class < 1)
        throw std::invalid_argument("make_synthetic_task: all arguments must be >= 1");

    Rng rng(seed);

    Eigen::MatrixXd centers(num_classes, dim);
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
        for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(k, j) = rng.normal();

    if (num_classes >= 2) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < centers.rows(); ++a)
            for (Eigen::Index b = a + 1; b < centers.rows(); ++b)
                min_dist = std::min(min_dist, (centers.row(a) - centers.row(b)).norm());
        if (!(min_dist > 0.0))
            throw std::runtime_error("make_synthetic_task: degenerate class centers");
        centers *= center_spacing(num_classes) / min_dist;
    }

    const Eigen::Index n = static_cast<Eigen::Index>(num_classes) * samples_per_class;
    Dataset data;
    data.num_classes = num_classes;
    data.features.resize(n, dim);
    data.labels.resize(n);
    Eigen::Index row = 0;
    for (int k = 0; k < num_classes; ++k) {
        for (int s = 0; s < samples_per_class; ++s, ++row) {
            for (Eigen::Index j = 0; j < dim; ++j)
                data.features(row, j) = centers(k, j) + rng.normal();
            data.labels[row] = k;
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order);
    return data.take(order);
}

}  // namespace fedsim
