#ifndef STILLACT_DBN_HPP
#define STILLACT_DBN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "stillact/geometry.hpp"
#include "stillact/rbm.hpp"

namespace stillact {

/// How layer-1 hidden activity is propagated to the layer-2 training set:
/// deterministic mean-field probabilities (default) or a one-shot binary
/// sample of them.
enum class Propagate { Mean, Sample };

struct DbnArchitecture {
    int input = kFeatureDim;  // 90
    int hidden1 = 200;
    int hidden2 = 50;
    int classes = kClassCount;  // 7
};

struct FineTuneConfig {
    double learning_rate = 0.1;
    int epochs = 1000;
    int batch_size = 20;
    std::uint64_t seed = 0;
};

/// Snapshot of how a model was trained; persisted alongside the parameters.
struct TrainingMeta {
    std::uint64_t seed = 0;
    CdConfig pretrain;
    FineTuneConfig finetune;
    Propagate propagate = Propagate::Mean;
};

/// The full stack: Gaussian RBM (input -> hidden1), binary RBM
/// (hidden1 -> hidden2), softmax head (hidden2 -> classes).
struct DbnModel {
    GaussianRbm layer1;
    BinaryRbm layer2;
    Eigen::MatrixXd softmax_W;     // hidden2 x classes
    Eigen::VectorXd softmax_bias;  // classes
    TrainingMeta meta;

    DbnArchitecture architecture() const {
        return {static_cast<int>(layer1.visible_units()), static_cast<int>(layer1.hidden_units()),
                static_cast<int>(layer2.hidden_units()), static_cast<int>(softmax_bias.size())};
    }
};

struct DbnGradients {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;
    Eigen::VectorXd b2;
    Eigen::MatrixXd W3;
    Eigen::VectorXd b3;
};

struct PretrainResult {
    GaussianRbm layer1;
    BinaryRbm layer2;
    std::vector<double> layer1_trace;
    std::vector<double> layer2_trace;
};

struct FineTuneResult {
    DbnModel model;
    std::vector<double> loss_trace;  // one mean cross-entropy per epoch
};

Eigen::VectorXd feature_to_vector(const FeatureVector& f);
Eigen::MatrixXd features_to_matrix(const std::vector<FeatureVector>& features);

/// Row-wise numerically stable softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Greedy layer-wise pre-training. Layer seeds and initializations derive
/// from config.seed; layer-2 inputs are the layer-1 hidden probabilities (or
/// one binary sample of them under Propagate::Sample).
PretrainResult pretrain(const Eigen::MatrixXd& features, const CdConfig& config,
                        Propagate propagate, const DbnArchitecture& arch);

/// Class probabilities; positive, summing to 1.
Eigen::VectorXd forward(const DbnModel& model, const Eigen::VectorXd& feature);
Eigen::VectorXd forward(const DbnModel& model, const FeatureVector& feature);
Eigen::MatrixXd forward(const DbnModel& model, const Eigen::MatrixXd& batch);

/// Mean cross-entropy of the labels plus backpropagated gradients for every
/// parameter of the classification path (visible biases do not enter it).
std::pair<double, DbnGradients> loss_and_gradients(const DbnModel& model,
                                                   const Eigen::MatrixXd& batch,
                                                   const std::vector<int>& labels);

/// Supervised fine-tuning of all stacked parameters; softmax head starts at
/// zero. Throws NumericFailure when the loss leaves the finite range.
FineTuneResult finetune(const GaussianRbm& layer1, const BinaryRbm& layer2,
                        const Eigen::MatrixXd& features, const std::vector<int>& labels,
                        const FineTuneConfig& config);

struct Prediction {
    int label = 0;
    Eigen::VectorXd scores;
};

/// Argmax of forward; ties resolve to the lowest class index.
Prediction predict(const DbnModel& model, const Eigen::VectorXd& feature);
Prediction predict(const DbnModel& model, const FeatureVector& feature);

}  // namespace stillact

#endif
