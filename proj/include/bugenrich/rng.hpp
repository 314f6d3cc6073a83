#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace bugenrich {

/// Seeded generator whose draws are identical across standard libraries:
/// mt19937_64 output is fully specified, and bounded draws use rejection
/// sampling here instead of the implementation-defined distributions.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[static_cast<std::size_t>(below(i))]);
        }
    }

    /// `count` distinct indices from [0, n), in sampled order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(std::min(count, n));
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bugenrich
