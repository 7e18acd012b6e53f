#pragma once

#include <cstdint>
#include <random>

namespace resdeloc {

inline constexpr std::uint64_t kDefaultSeed = 20140515ULL;

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed of the independent stream owned by (sample_index, attempt) under a
// master seed. Order- and thread-independent by construction.
inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t sample_index,
                                              std::uint64_t attempt = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ sample_index);
    h = splitmix64(h ^ (attempt * 0xD1B54A32D192ED03ULL));
    return h;
}

// Derives a child master seed for a named sub-experiment.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return splitmix64(master ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t sample_index,
                          std::uint64_t attempt = 0) {
    return Engine(substream_seed(master, sample_index, attempt));
}

}  // namespace resdeloc
