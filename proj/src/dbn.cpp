#include "stillact/dbn.hpp"

#include <cmath>
#include <string>

#include "stillact/errors.hpp"
#include "stillact/minibatch.hpp"

namespace stillact {

namespace {

Eigen::MatrixXd logistic_rows(Eigen::MatrixXd z) {
    return z.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

struct ForwardCache {
    Eigen::MatrixXd h1;
    Eigen::MatrixXd h2;
    Eigen::MatrixXd probs;
};

ForwardCache forward_cached(const DbnModel& model, const Eigen::MatrixXd& batch) {
    if (batch.cols() != model.layer1.visible_units()) {
        throw DimensionMismatch("forward: feature length " + std::to_string(batch.cols()) +
                                ", model expects " +
                                std::to_string(model.layer1.visible_units()));
    }
    ForwardCache cache;
    cache.h1 = hidden_given_visible(model.layer1, batch);
    cache.h2 = logistic_rows((cache.h1 * model.layer2.W).rowwise() +
                             model.layer2.hidden_bias.transpose());
    cache.probs = softmax_rows((cache.h2 * model.softmax_W).rowwise() +
                               model.softmax_bias.transpose());
    return cache;
}

void check_labels(const std::vector<int>& labels, Eigen::Index rows, int classes) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw DimensionMismatch("labels/batch size mismatch");
    }
    for (int label : labels) {
        if (label < 0 || label >= classes) throw LabelOutOfRange(label);
    }
}

}  // namespace

Eigen::VectorXd feature_to_vector(const FeatureVector& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.values.data(), kFeatureDim);
}

Eigen::MatrixXd features_to_matrix(const std::vector<FeatureVector>& features) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(features.size()), kFeatureDim);
    for (std::size_t i = 0; i < features.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = feature_to_vector(features[i]).transpose();
    }
    return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        double peak = logits.row(r).maxCoeff();
        Eigen::ArrayXd e = (logits.row(r).array() - peak).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

PretrainResult pretrain(const Eigen::MatrixXd& features, const CdConfig& config,
                        Propagate propagate, const DbnArchitecture& arch) {
    if (features.rows() == 0) throw EmptyDataset();
    if (features.cols() != arch.input) {
        throw DimensionMismatch("pretrain: feature length " + std::to_string(features.cols()) +
                                ", architecture expects " + std::to_string(arch.input));
    }

    PretrainResult result;

    rng::Engine init1 = rng::make_engine(config.seed, "dbn.init.layer1");
    result.layer1 = make_gaussian_rbm(arch.input, arch.hidden1, init1);
    CdConfig cfg1 = config;
    cfg1.seed = rng::mix(config.seed, rng::hash_label("dbn.train.layer1"));
    result.layer1_trace = pretrain_layer(result.layer1, features, cfg1);

    Eigen::MatrixXd layer2_input = hidden_given_visible(result.layer1, features);
    if (propagate == Propagate::Sample) {
        rng::Engine sampler = rng::make_engine(config.seed, "dbn.propagate");
        for (Eigen::Index r = 0; r < layer2_input.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer2_input.cols(); ++c) {
                layer2_input(r, c) = rng::uniform(sampler) < layer2_input(r, c) ? 1.0 : 0.0;
            }
        }
    }

    rng::Engine init2 = rng::make_engine(config.seed, "dbn.init.layer2");
    result.layer2 = make_binary_rbm(arch.hidden1, arch.hidden2, init2);
    CdConfig cfg2 = config;
    cfg2.seed = rng::mix(config.seed, rng::hash_label("dbn.train.layer2"));
    result.layer2_trace = pretrain_layer(result.layer2, layer2_input, cfg2);

    return result;
}

Eigen::VectorXd forward(const DbnModel& model, const Eigen::VectorXd& feature) {
    return forward(model, Eigen::MatrixXd(feature.transpose())).row(0).transpose();
}

Eigen::VectorXd forward(const DbnModel& model, const FeatureVector& feature) {
    return forward(model, feature_to_vector(feature));
}

Eigen::MatrixXd forward(const DbnModel& model, const Eigen::MatrixXd& batch) {
    return forward_cached(model, batch).probs;
}

std::pair<double, DbnGradients> loss_and_gradients(const DbnModel& model,
                                                   const Eigen::MatrixXd& batch,
                                                   const std::vector<int>& labels) {
    if (batch.rows() == 0) throw EmptyBatch();
    check_labels(labels, batch.rows(), static_cast<int>(model.softmax_bias.size()));

    ForwardCache cache = forward_cached(model, batch);
    const double n = static_cast<double>(batch.rows());

    double loss = 0.0;
    Eigen::MatrixXd dz3 = cache.probs;
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        int label = labels[static_cast<std::size_t>(r)];
        loss -= std::log(cache.probs(r, label));
        dz3(r, label) -= 1.0;
    }
    loss /= n;
    dz3 /= n;

    DbnGradients g;
    g.W3 = cache.h2.transpose() * dz3;
    g.b3 = dz3.colwise().sum().transpose();

    Eigen::MatrixXd dz2 = (dz3 * model.softmax_W.transpose()).array() * cache.h2.array() *
                          (1.0 - cache.h2.array());
    g.W2 = cache.h1.transpose() * dz2;
    g.b2 = dz2.colwise().sum().transpose();

    Eigen::MatrixXd dz1 = (dz2 * model.layer2.W.transpose()).array() * cache.h1.array() *
                          (1.0 - cache.h1.array());
    g.W1 = (batch / model.layer1.sigma).transpose() * dz1;
    g.b1 = dz1.colwise().sum().transpose();

    return {loss, std::move(g)};
}

FineTuneResult finetune(const GaussianRbm& layer1, const BinaryRbm& layer2,
                        const Eigen::MatrixXd& features, const std::vector<int>& labels,
                        const FineTuneConfig& config) {
    if (features.rows() == 0) throw EmptyDataset();
    check_labels(labels, features.rows(), kClassCount);
    if (layer1.hidden_units() != layer2.visible_units()) {
        throw DimensionMismatch("finetune: layer1 hidden != layer2 visible");
    }

    FineTuneResult result;
    result.model.layer1 = layer1;
    result.model.layer2 = layer2;
    result.model.softmax_W = Eigen::MatrixXd::Zero(layer2.hidden_units(), kClassCount);
    result.model.softmax_bias = Eigen::VectorXd::Zero(kClassCount);
    result.model.meta.finetune = config;

    rng::Engine eng = rng::make_engine(config.seed, "dbn.finetune");
    const int n = static_cast<int>(features.rows());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const std::vector<int>& batch_idx : epoch_batches(n, config.batch_size, eng)) {
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(batch_idx.size()), features.cols());
            std::vector<int> batch_labels(batch_idx.size());
            for (std::size_t r = 0; r < batch_idx.size(); ++r) {
                batch.row(static_cast<Eigen::Index>(r)) = features.row(batch_idx[r]);
                batch_labels[r] = labels[static_cast<std::size_t>(batch_idx[r])];
            }

            auto [loss, g] = loss_and_gradients(result.model, batch, batch_labels);
            if (!std::isfinite(loss)) {
                throw NumericFailure("fine-tuning loss is non-finite at epoch " +
                                     std::to_string(epoch + 1));
            }

            const double eta = config.learning_rate;
            result.model.layer1.W -= eta * g.W1;
            result.model.layer1.hidden_bias -= eta * g.b1;
            result.model.layer2.W -= eta * g.W2;
            result.model.layer2.hidden_bias -= eta * g.b2;
            result.model.softmax_W -= eta * g.W3;
            result.model.softmax_bias -= eta * g.b3;

            epoch_loss += loss * static_cast<double>(batch_idx.size());
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

Prediction predict(const DbnModel& model, const Eigen::VectorXd& feature) {
    Prediction p;
    p.scores = forward(model, feature);
    p.label = 0;
    for (Eigen::Index j = 1; j < p.scores.size(); ++j) {
        if (p.scores(j) > p.scores(p.label)) p.label = static_cast<int>(j);
    }
    return p;
}

Prediction predict(const DbnModel& model, const FeatureVector& feature) {
    return predict(model, feature_to_vector(feature));
}

}  // namespace stillact
