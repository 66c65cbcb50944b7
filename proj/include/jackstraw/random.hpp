#ifndef JACKSTRAW_RANDOM_HPP
#define JACKSTRAW_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace jackstraw {

using Rng = std::mt19937_64;

/// Independent stream for (seed, path...): every parallel unit of work gets
/// its own generator keyed by its position, never by scheduling order.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto p : path) push(p);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// Stream tags keep different consumers of the same seed apart.
enum class StreamTag : std::uint64_t {
    JackstrawIteration = 0x6a61636b,
    DeleteSPartition = 0x64656c73,
    Study = 0x73747564,
    Method = 0x6d657468,
    Enrichment = 0x656e7269,
};

inline constexpr std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

/// First `count` entries of a uniformly random permutation of 0..n-1
/// (partial Fisher-Yates), i.e. a uniform draw without replacement.
inline std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t count, Rng& rng) {
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

} // namespace jackstraw

#endif
