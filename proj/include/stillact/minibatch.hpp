#ifndef STILLACT_MINIBATCH_HPP
#define STILLACT_MINIBATCH_HPP

#include <numeric>
#include <vector>

#include "stillact/rng.hpp"

namespace stillact {

/// Deterministic Fisher-Yates permutation of 0..n-1.
inline std::vector<int> shuffled_indices(int n, rng::Engine& eng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        int j = rng::uniform_int(eng, 0, i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

/// One epoch's worth of shuffled mini-batches; the final batch may be short.
inline std::vector<std::vector<int>> epoch_batches(int n, int batch_size, rng::Engine& eng) {
    std::vector<int> idx = shuffled_indices(n, eng);
    std::vector<std::vector<int>> batches;
    for (int start = 0; start < n; start += batch_size) {
        int end = std::min(start + batch_size, n);
        batches.emplace_back(idx.begin() + start, idx.begin() + end);
    }
    return batches;
}

}  // namespace stillact

#endif
