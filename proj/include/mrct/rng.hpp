#ifndef MRCT_RNG_HPP
#define MRCT_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace mrct::rng {

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    // FNV-1a 64-bit
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives the seed of a named substream. Streams with distinct (name, a, b)
/// never collide in practice, so adding consumers leaves existing streams intact.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = mix64(seed ^ hash_name(name));
    s = mix64(s ^ mix64(a + 0x632be59bd9b4e019ULL));
    s = mix64(s ^ mix64(b + 0x9e6c63d0876a46bdULL));
    return s;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(substream_seed(seed, name, a, b));
}

}  // namespace mrct::rng

#endif
