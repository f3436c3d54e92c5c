#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gkr {

/// Seeded generator with distribution code written out explicitly, so draws are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Marsaglia polar method).
    double normal();
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);
    /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent child seed from a parent seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

} // namespace gkr
