#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace humbench {

// Portable seeded generator. std::mt19937_64's output sequence is fixed by
// the standard; the distributions here are implemented locally so results
// do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream for (seed, stream) pairs, e.g. per Monte-Carlo trial.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01();

    bool coin() { return (next() >> 63) != 0; }

    // Partial Fisher-Yates: the first k entries of a random permutation of [0, n).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace humbench
