#include "stillact/rbm.hpp"

#include <cmath>
#include <string>

#include "stillact/errors.hpp"
#include "stillact/minibatch.hpp"

namespace stillact {

namespace {

double softplus(double x) {
    // log(1 + e^x), stable for large |x|.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Eigen::MatrixXd logistic_inplace(Eigen::MatrixXd z) {
    return z.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

void check_visible(Eigen::Index expected, Eigen::Index got, const char* what) {
    if (expected != got) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(expected) +
                                " visible units, got " + std::to_string(got));
    }
}

void check_hidden(Eigen::Index expected, Eigen::Index got, const char* what) {
    if (expected != got) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(expected) +
                                " hidden units, got " + std::to_string(got));
    }
}

/// Sample a binary matrix elementwise from probabilities, row-major draw order.
Eigen::MatrixXd sample_bernoulli(const Eigen::MatrixXd& probs, rng::Engine& eng) {
    Eigen::MatrixXd out(probs.rows(), probs.cols());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            out(r, c) = rng::uniform(eng) < probs(r, c) ? 1.0 : 0.0;
        }
    }
    return out;
}

template <typename Rbm>
double cd_step_impl(Rbm& rbm, const Eigen::MatrixXd& batch, const CdConfig& config,
                    rng::Engine& eng) {
    if (batch.rows() == 0) throw EmptyBatch();
    check_visible(rbm.visible_units(), batch.cols(), "cd_step batch");
    if (config.k < 1) throw InvalidConfig("cd k must be >= 1");

    const double n = static_cast<double>(batch.rows());

    Eigen::MatrixXd pos_hidden = hidden_given_visible(rbm, batch);

    // Gibbs chain: hidden sampled binary, visible kept at probabilities/means.
    Eigen::MatrixXd hidden_probs = pos_hidden;
    Eigen::MatrixXd visible = batch;
    for (int step = 0; step < config.k; ++step) {
        Eigen::MatrixXd hidden_states = sample_bernoulli(hidden_probs, eng);
        visible = visible_given_hidden(rbm, hidden_states);
        hidden_probs = hidden_given_visible(rbm, visible);
    }
    const Eigen::MatrixXd& neg_hidden = hidden_probs;

    const double scale = config.learning_rate / n;
    rbm.W += scale * (batch.transpose() * pos_hidden - visible.transpose() * neg_hidden);
    rbm.hidden_bias += scale * (pos_hidden.colwise().sum() - neg_hidden.colwise().sum()).transpose();
    rbm.visible_bias += scale * (batch.colwise().sum() - visible.colwise().sum()).transpose();

    return (batch - visible).squaredNorm() / (n * static_cast<double>(batch.cols()));
}

template <typename Rbm>
std::vector<double> pretrain_layer_impl(Rbm& rbm, const Eigen::MatrixXd& data,
                                        const CdConfig& config) {
    if (data.rows() == 0) throw EmptyDataset();
    check_visible(rbm.visible_units(), data.cols(), "pretrain data");

    rng::Engine eng = rng::make_engine(config.seed, "rbm.pretrain");
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(std::max(config.epochs, 0)));

    const int n = static_cast<int>(data.rows());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double squared_error = 0.0;
        for (const std::vector<int>& batch_idx : epoch_batches(n, config.batch_size, eng)) {
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(batch_idx.size()), data.cols());
            for (std::size_t r = 0; r < batch_idx.size(); ++r) {
                batch.row(static_cast<Eigen::Index>(r)) = data.row(batch_idx[r]);
            }
            double mse = cd_step(rbm, batch, config, eng);
            squared_error += mse * static_cast<double>(batch.size());
        }
        trace.push_back(squared_error / static_cast<double>(data.size()));
    }
    return trace;
}

}  // namespace

BinaryRbm make_binary_rbm(Eigen::Index visible, Eigen::Index hidden, rng::Engine& eng) {
    BinaryRbm rbm;
    rbm.W = Eigen::MatrixXd(visible, hidden);
    for (Eigen::Index r = 0; r < visible; ++r) {
        for (Eigen::Index c = 0; c < hidden; ++c) rbm.W(r, c) = rng::normal(eng, 0.0, 0.01);
    }
    rbm.hidden_bias = Eigen::VectorXd::Zero(hidden);
    rbm.visible_bias = Eigen::VectorXd::Zero(visible);
    return rbm;
}

GaussianRbm make_gaussian_rbm(Eigen::Index visible, Eigen::Index hidden, rng::Engine& eng) {
    GaussianRbm rbm;
    rbm.W = Eigen::MatrixXd(visible, hidden);
    for (Eigen::Index r = 0; r < visible; ++r) {
        for (Eigen::Index c = 0; c < hidden; ++c) rbm.W(r, c) = rng::normal(eng, 0.0, 0.01);
    }
    rbm.hidden_bias = Eigen::VectorXd::Zero(hidden);
    rbm.visible_bias = Eigen::VectorXd::Zero(visible);
    rbm.sigma = 1.0;
    return rbm;
}

double energy(const BinaryRbm& rbm, const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    check_visible(rbm.visible_units(), v.size(), "energy v");
    check_hidden(rbm.hidden_units(), h.size(), "energy h");
    return -v.dot(rbm.W * h) - rbm.hidden_bias.dot(h) - rbm.visible_bias.dot(v);
}

double energy(const GaussianRbm& rbm, const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    check_visible(rbm.visible_units(), v.size(), "energy v");
    check_hidden(rbm.hidden_units(), h.size(), "energy h");
    double quadratic = (v - rbm.visible_bias).squaredNorm() / (2.0 * rbm.sigma * rbm.sigma);
    return quadratic - v.dot(rbm.W * h) / rbm.sigma - rbm.hidden_bias.dot(h);
}

Eigen::VectorXd hidden_given_visible(const BinaryRbm& rbm, const Eigen::VectorXd& v) {
    check_visible(rbm.visible_units(), v.size(), "hidden_given_visible");
    return logistic_inplace(rbm.hidden_bias + rbm.W.transpose() * v);
}

Eigen::VectorXd hidden_given_visible(const GaussianRbm& rbm, const Eigen::VectorXd& v) {
    check_visible(rbm.visible_units(), v.size(), "hidden_given_visible");
    return logistic_inplace(rbm.hidden_bias + rbm.W.transpose() * (v / rbm.sigma));
}

Eigen::MatrixXd hidden_given_visible(const BinaryRbm& rbm, const Eigen::MatrixXd& batch) {
    check_visible(rbm.visible_units(), batch.cols(), "hidden_given_visible batch");
    return logistic_inplace((batch * rbm.W).rowwise() + rbm.hidden_bias.transpose());
}

Eigen::MatrixXd hidden_given_visible(const GaussianRbm& rbm, const Eigen::MatrixXd& batch) {
    check_visible(rbm.visible_units(), batch.cols(), "hidden_given_visible batch");
    return logistic_inplace(((batch / rbm.sigma) * rbm.W).rowwise() + rbm.hidden_bias.transpose());
}

Eigen::VectorXd visible_given_hidden(const BinaryRbm& rbm, const Eigen::VectorXd& h) {
    check_hidden(rbm.hidden_units(), h.size(), "visible_given_hidden");
    return logistic_inplace(rbm.visible_bias + rbm.W * h);
}

Eigen::VectorXd visible_given_hidden(const GaussianRbm& rbm, const Eigen::VectorXd& h) {
    check_hidden(rbm.hidden_units(), h.size(), "visible_given_hidden");
    return rbm.visible_bias + rbm.sigma * (rbm.W * h);
}

Eigen::MatrixXd visible_given_hidden(const BinaryRbm& rbm, const Eigen::MatrixXd& hidden) {
    check_hidden(rbm.hidden_units(), hidden.cols(), "visible_given_hidden batch");
    return logistic_inplace((hidden * rbm.W.transpose()).rowwise() + rbm.visible_bias.transpose());
}

Eigen::MatrixXd visible_given_hidden(const GaussianRbm& rbm, const Eigen::MatrixXd& hidden)
{
    check_hidden(rbm.hidden_units(), hidden.cols(), "visible_given_hidden batch");
    return (rbm.sigma * (hidden * rbm.W.transpose())).rowwise() + rbm.visible_bias.transpose();
}

double free_energy(const BinaryRbm& rbm, const Eigen::VectorXd& v) {
    check_visible(rbm.visible_units(), v.size(), "free_energy");
    Eigen::VectorXd activation = rbm.hidden_bias + rbm.W.transpose() * v;
    double hidden_term = 0.0;
    for (Eigen::Index j = 0; j < activation.size(); ++j) hidden_term += softplus(activation(j));
    return -rbm.visible_bias.dot(v) - hidden_term;
}

double cd_step(BinaryRbm& rbm, const Eigen::MatrixXd& batch, const CdConfig& config,
               rng::Engine& eng) {
    return cd_step_impl(rbm, batch, config, eng);
}

double cd_step(GaussianRbm& rbm, const Eigen::MatrixXd& batch, const CdConfig& config,
               rng::Engine& eng) {
    return cd_step_impl(rbm, batch, config, eng);
}

std::vector<double> pretrain_layer(BinaryRbm& rbm, const Eigen::MatrixXd& data,
                                   const CdConfig& config) {
    return pretrain_layer_impl(rbm, data, config);
}

std::vector<double> pretrain_layer(GaussianRbm& rbm, const Eigen::MatrixXd& data,
                                   const CdConfig& config) {
    return pretrain_layer_impl(rbm, data, config);
}

}  // namespace stillact
