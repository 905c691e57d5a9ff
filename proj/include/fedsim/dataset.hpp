#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace fedsim {

/// A labeled sample set. Rows of `features` are samples; `labels` holds the
/// class index of each row, in [0, num_classes).
struct Dataset {
    Eigen::MatrixXd features;  // n x d
    Eigen::VectorXi labels;    // n
    int num_classes = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    /// Gathers the given rows into a new dataset (order preserved).
    Dataset take(const std::vector<Eigen::Index>& rows) const;

    /// Contiguous row range [begin, begin + count).
    Dataset slice(Eigen::Index begin, Eigen::Index count) const;

    /// Throws std::invalid_argument if any invariant is violated:
    /// matching row counts, labels in range, finite features.
    void validate() const;
};

/// Gaussian-blob classification task: one unit-variance cluster per class,
/// centers drawn from the seeded generator and spread far enough apart that
/// a linear classifier separates the classes with high accuracy. Rows come
/// out shuffled, with exactly `samples_per_class` rows per class.
Dataset make_synthetic_task(int num_classes, int dim, int samples_per_class,
                            std::uint64_t seed);

}  // namespace fedsim
