#ifndef STILLACT_TESTS_ORACLES_HPP
#define STILLACT_TESTS_ORACLES_HPP

// Reference implementations the tests compare against. Each one is the
// dumbest algorithm that can be written down: plain loops, exhaustive
// enumeration, O(n^2) walks. They share no code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

// E(v,h) = -v'Wh - b'h - c'v, written as explicit loops.
inline double binary_energy(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c, const std::vector<int>& v,
                            const std::vector<int>& h) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            e -= v[static_cast<std::size_t>(i)] * W(i, j) * h[static_cast<std::size_t>(j)];
        }
    }
    for (Eigen::Index j = 0; j < b.size(); ++j) e -= b(j) * h[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < c.size(); ++i) e -= c(i) * v[static_cast<std::size_t>(i)];
    return e;
}

inline std::vector<int> bits(unsigned mask, int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = (mask >> j) & 1u;
    return out;
}

// P(h_j = 1 | v) by summing the Boltzmann weights of all 2^n hidden states.
inline double enum_hidden_prob(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const std::vector<int>& v, int j) {
    const int n = static_cast<int>(W.cols());
    double total = 0.0, marked = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> h = bits(mask, n);
        double w = std::exp(-binary_energy(W, b, c, v, h));
        total += w;
        if (h[static_cast<std::size_t>(j)] == 1) marked += w;
    }
    return marked / total;
}

// Joint P(h | v) for one full hidden configuration.
inline double enum_hidden_joint(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& c, const std::vector<int>& v,
                                const std::vector<int>& h) {
    const int n = static_cast<int>(W.cols());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> hh = bits(mask, n);
        total += std::exp(-binary_energy(W, b, c, v, hh));
    }
    return std::exp(-binary_energy(W, b, c, v, h)) / total;
}

// F(v) = -log sum_h exp(-E(v,h)).
inline double enum_free_energy(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const std::vector<int>& v) {
    const int n = static_cast<int>(W.cols());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> h = bits(mask, n);
        total += std::exp(-binary_energy(W, b, c, v, h));
    }
    return -std::log(total);
}

// Average precision by an explicit precision/recall walk: rank by repeated
// selection of the highest remaining score (earliest index wins ties), then
// recount true positives from scratch at every positive rank.
inline double ap_walk(const std::vector<double>& scores, const std::vector<bool>& positives) {
    const std::size_t n = scores.size();
    std::vector<char> used(n, 0);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            if (best == n || scores[i] > scores[best]) best = i;
        }
        used[best] = 1;
        order.push_back(best);
    }
    double sum = 0.0;
    int hits = 0;
    for (std::size_t rank = 0; rank < n; ++rank) {
        if (!positives[order[rank]]) continue;
        int tp = 0;
        for (std::size_t r2 = 0; r2 <= rank; ++r2) {
            if (positives[order[r2]]) ++tp;
        }
        hits = tp;
        sum += static_cast<double>(tp) / static_cast<double>(rank + 1);
    }
    return sum / static_cast<double>(hits);
}

// Central finite difference of f at the parameter referenced by slot.
template <typename F>
double central_diff(F&& f, double& slot, double step) {
    const double saved = slot;
    slot = saved + step;
    const double up = f();
    slot = saved - step;
    const double down = f();
    slot = saved;
    return (up - down) / (2.0 * step);
}

inline double relative_error(double analytic, double numeric) {
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
    return std::fabs(analytic - numeric) / denom;
}

}  // namespace oracles

#endif
