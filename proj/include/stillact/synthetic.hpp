#ifndef STILLACT_SYNTHETIC_HPP
#define STILLACT_SYNTHETIC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "stillact/annotation.hpp"
#include "stillact/dbn.hpp"
#include "stillact/evaluation.hpp"

namespace stillact {

struct ScoreRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct NoiseModel {
    double coord_sigma = 0.0;          // Gaussian noise per endpoint coordinate, px
    double miss_prob = 0.0;            // per non-head entity dropout probability
    double false_positive_prob = 0.0;  // per absent entity spurious-detection probability
    ScoreRange true_score{0.6, 1.0};
    ScoreRange false_score{0.0, 0.4};
};

struct SynthConfig {
    int images_per_class = 100;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

/// One action class's canonical stick figure plus interacting objects,
/// entities in catalog order. Head length is 50 in the shipped templates, so
/// noiseless samples are already at canonical scale.
struct ClassTemplate {
    int label = 0;
    std::vector<std::pair<EntityKind, CentralLine>> entities;
};

struct SynthTemplates {
    double width = 0;
    double height = 0;
    std::vector<ClassTemplate> classes;  // exactly kClassCount, label order
};

/// Loads and validates the class-template data file.
SynthTemplates load_templates(const std::filesystem::path& path);

/// Samples images_per_class labeled annotations per class: template geometry
/// plus coordinate noise (snapped to a 1/16 px grid), entity dropout, spurious
/// detections, and detector-score sampling. Deterministic given the seed; the
/// head is never dropped.
std::vector<ImageAnnotation> generate(const SynthTemplates& templates, const SynthConfig& config);

/// Multinomial logistic regression on the encoded features; the shallow
/// comparison model for the benchmark.
struct SoftmaxModel {
    Eigen::MatrixXd W;     // input x classes
    Eigen::VectorXd bias;  // classes
};

struct ShallowGradients {
    Eigen::MatrixXd W;
    Eigen::VectorXd bias;
};

struct ShallowResult {
    SoftmaxModel model;
    std::vector<double> loss_trace;
};

Eigen::VectorXd shallow_forward(const SoftmaxModel& model, const Eigen::VectorXd& feature);

std::pair<double, ShallowGradients> shallow_loss_and_gradients(const SoftmaxModel& model,
                                                               const Eigen::MatrixXd& batch,
                                                               const std::vector<int>& labels);

/// Same mini-batch SGD scheme as dbn::finetune, applied to the single layer.
ShallowResult train_shallow(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                            const FineTuneConfig& config);

Scorer shallow_scorer(const SoftmaxModel& model);

}  // namespace stillact

#endif
