#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "blocksolve/errors.hpp"
#include "blocksolve/rng.hpp"

namespace blocksolve {

/// A uniformly drawn n-subset of {0, ..., N-1}, sorted ascending.
struct SubsetSample {
    std::vector<int> indices;
    int n() const { return static_cast<int>(indices.size()); }
};

/// Uniform n-subset via partial Fisher-Yates, then sort: every subset has
/// probability 1/C(N,n), O(N) per draw.
inline SubsetSample sample_subset(Rng& rng, int total, int n) {
    if (n < 1 || n > total)
        throw ParameterError("sample_subset: randomization rule (U) requires 1 <= n <= N, got n = " +
                             std::to_string(n) + ", N = " + std::to_string(total));
    std::vector<int> pool(static_cast<std::size_t>(total));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(total - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    SubsetSample s;
    s.indices.assign(pool.begin(), pool.begin() + n);
    std::sort(s.indices.begin(), s.indices.end());
    return s;
}

} // namespace blocksolve
