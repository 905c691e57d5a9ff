#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "fedsim/dataset.hpp"

namespace fedsim {

/// Parameters of a multinomial logistic (linear softmax) classifier.
struct ModelParams {
    Eigen::MatrixXd weights;  // K x d
    Eigen::VectorXd biases;   // K

    Eigen::Index num_classes() const { return weights.rows(); }
    Eigen::Index dim() const { return weights.cols(); }
    bool all_finite() const { return weights.allFinite() && biases.allFinite(); }

    static ModelParams zero(Eigen::Index num_classes, Eigen::Index dim);
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

/// Row-wise softmax with max subtraction. Accepts any dense expression.
template <typename Derived>
Eigen::MatrixXd softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::MatrixXd p = logits.derived();
    p.colwise() -= p.rowwise().maxCoeff();
    p = p.array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

/// Per-class linear scores, one row per sample: X * W^T + b^T.
Eigen::MatrixXd class_scores(const ModelParams& params, const Eigen::MatrixXd& features);

/// Mean multinomial cross-entropy over the dataset (log-sum-exp form).
double cross_entropy(const ModelParams& params, const Dataset& data);

/// Mean analytic cross-entropy gradient over the batch, in ModelParams shape.
ModelParams compute_gradient(const ModelParams& params, const Dataset& batch);

/// Fraction of test rows whose argmax class score equals the label.
double evaluate(const ModelParams& params, const Dataset& test);

/// Mini-batch SGD on the cross-entropy loss for exactly cfg.epochs passes.
/// Batch order is drawn per epoch from a generator seeded with
/// (cfg.seed, epoch index), so runs are bit-reproducible.
ModelParams train_local(const Dataset& data, const ModelParams& init, const TrainConfig& cfg);

}  // namespace fedsim
