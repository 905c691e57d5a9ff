#include "fedsim/model.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

void check_dims(const ModelParams& params, const Dataset& data, const char* where) {
    if (params.weights.rows() != params.biases.size())
        throw std::invalid_argument(std::string(where) + ": weights/biases class mismatch");
    if (params.dim() != data.dim())
        throw std::invalid_argument(std::string(where) + ": feature dimension mismatch");
    if (params.num_classes() != data.num_classes)
        throw std::invalid_argument(std::string(where) + ": class count mismatch");
}

}  // namespace

ModelParams ModelParams::zero(Eigen::Index num_classes, Eigen::Index dim) {
    return {Eigen::MatrixXd::Zero(num_classes, dim), Eigen::VectorXd::Zero(num_classes)};
}

Eigen::MatrixXd class_scores(const ModelParams& params, const Eigen::MatrixXd& features) {
    return (features * params.weights.transpose()).rowwise() + params.biases.transpose();
}

double cross_entropy(const ModelParams& params, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("cross_entropy: empty dataset");
    check_dims(params, data, "cross_entropy");
    const Eigen::MatrixXd z = class_scores(params, data.features);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double zmax = z.row(i).maxCoeff();
        const double lse = zmax + std::log((z.row(i).array() - zmax).exp().sum());
        loss += lse - z(i, data.labels[i]);
    }
    return loss / static_cast<double>(z.rows());
}

ModelParams compute_gradient(const ModelParams& params, const Dataset& batch) {
    if (batch.size() == 0) throw std::invalid_argument("compute_gradient: empty batch");
    check_dims(params, batch, "compute_gradient");

    // residual = softmax(scores) - one_hot(labels), one row per sample
    Eigen::MatrixXd residual = softmax_rows(class_scores(params, batch.features));
    for (Eigen::Index i = 0; i < residual.rows(); ++i) residual(i, batch.labels[i]) -= 1.0;

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    ModelParams grad;
    grad.weights = inv_n * (residual.transpose() * batch.features);
    grad.biases = inv_n * residual.colwise().sum().transpose();
    return grad;
}

double evaluate(const ModelParams& params, const Dataset& test) {
    if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    check_dims(params, test, "evaluate");
    const Eigen::MatrixXd z = class_scores(params, test.features);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        Eigen::Index predicted = 0;
        z.row(i).maxCoeff(&predicted);
        if (predicted == test.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

ModelParams train_local(const Dataset& data, const ModelParams& init, const TrainConfig& cfg) {
    if (data.size() == 0) throw std::invalid_argument("train_local: empty dataset");
    check_dims(init, data, "train_local");
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("train_local: learning_rate must be positive");
    if (cfg.epochs < 1) throw std::invalid_argument("train_local: epochs must be >= 1");
    if (cfg.batch_size < 1 || cfg.batch_size > data.size())
        throw std::invalid_argument("train_local: batch_size must be in [1, dataset size]");

    ModelParams params = init;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const std::vector<Eigen::Index> batch_rows(order.begin() + start, order.begin() + end);
            const ModelParams grad = compute_gradient(params, data.take(batch_rows));
            params.weights -= cfg.learning_rate * grad.weights;
            params.biases -= cfg.learning_rate * grad.biases;
            if (!params.all_finite())
                throw std::runtime_error(
                    "train_local: non-finite parameters; learning rate likely too large");
        }
    }
    return params;
}

}  // namespace fedsim
