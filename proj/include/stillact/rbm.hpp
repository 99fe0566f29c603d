#ifndef STILLACT_RBM_HPP
#define STILLACT_RBM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stillact/rng.hpp"

namespace stillact {

/// Binary-binary RBM. W is visible x hidden; energy
///   E(v,h) = -v' W h - b' h - c' v
/// with hidden bias b and visible bias c.
struct BinaryRbm {
    Eigen::MatrixXd W;
    Eigen::VectorXd hidden_bias;   // b, size n
    Eigen::VectorXd visible_bias;  // c, size m

    Eigen::Index visible_units() const { return W.rows(); }
    Eigen::Index hidden_units() const { return W.cols(); }
};

/// Gaussian-binary RBM with a shared visible standard deviation; energy
///   E(v,h) = 1/(2 sigma^2) sum_i (v_i - c_i)^2 - 1/sigma v' W h - b' h
struct GaussianRbm {
    Eigen::MatrixXd W;
    Eigen::VectorXd hidden_bias;
    Eigen::VectorXd visible_bias;
    double sigma = 1.0;

    Eigen::Index visible_units() const { return W.rows(); }
    Eigen::Index hidden_units() const { return W.cols(); }
};

struct CdConfig {
    double learning_rate = 0.01;
    int epochs = 100;
    int batch_size = 20;
    int k = 1;  // Gibbs alternations per update
    std::uint64_t seed = 0;
};

/// Weights ~ Normal(0, 0.01^2), biases zero.
BinaryRbm make_binary_rbm(Eigen::Index visible, Eigen::Index hidden, rng::Engine& eng);
GaussianRbm make_gaussian_rbm(Eigen::Index visible, Eigen::Index hidden, rng::Engine& eng);

double energy(const BinaryRbm& rbm, const Eigen::VectorXd& v, const Eigen::VectorXd& h);
double energy(const GaussianRbm& rbm, const Eigen::VectorXd& v, const Eigen::VectorXd& h);

/// P(h_j = 1 | v), elementwise logistic of b + W'v (binary) or b + W'(v/sigma).
Eigen::VectorXd hidden_given_visible(const BinaryRbm& rbm, const Eigen::VectorXd& v);
Eigen::VectorXd hidden_given_visible(const GaussianRbm& rbm, const Eigen::VectorXd& v);

/// Batched variants; rows are samples.
Eigen::MatrixXd hidden_given_visible(const BinaryRbm& rbm, const Eigen::MatrixXd& batch);
Eigen::MatrixXd hidden_given_visible(const GaussianRbm& rbm, const Eigen::MatrixXd& batch);

/// Binary: P(v_i = 1 | h). Gaussian: the conditional means c + sigma W h.
Eigen::VectorXd visible_given_hidden(const BinaryRbm& rbm, const Eigen::VectorXd& h);
Eigen::VectorXd visible_given_hidden(const GaussianRbm& rbm, const Eigen::VectorXd& h);
Eigen::MatrixXd visible_given_hidden(const BinaryRbm& rbm, const Eigen::MatrixXd& hidden);
Eigen::MatrixXd visible_given_hidden(const GaussianRbm& rbm, const Eigen::MatrixXd& hidden);

/// F(v) = -c'v - sum_j softplus(b_j + (W'v)_j). exp(-F(v)) equals the
/// unnormalized marginal sum_h exp(-E(v,h)) exactly.
double free_energy(const BinaryRbm& rbm, const Eigen::VectorXd& v);

/// One CD-k parameter update on a batch (rows = samples). Hidden states are
/// sampled binary at every alternation; visible reconstructions use
/// probabilities (binary) or means (Gaussian) — no visible noise. Returns the
/// mean squared reconstruction error over all batch elements.
double cd_step(BinaryRbm& rbm, const Eigen::MatrixXd& batch, const CdConfig& config,
               rng::Engine& eng);
double cd_step(GaussianRbm& rbm, const Eigen::MatrixXd& batch, const CdConfig& config,
               rng::Engine& eng);

/// Full pre-training schedule: config.epochs passes of shuffled mini-batches.
/// Returns one mean reconstruction error per epoch.
std::vector<double> pretrain_layer(BinaryRbm& rbm, const Eigen::MatrixXd& data,
                                   const CdConfig& config);
std::vector<double> pretrain_layer(GaussianRbm& rbm, const Eigen::MatrixXd& data,
                                   const CdConfig& config);

}  // namespace stillact

#endif
