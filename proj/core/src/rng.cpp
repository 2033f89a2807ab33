#include "labelmeas/rng.hpp"

#include "labelmeas/stats.hpp"

namespace labelmeas::rng {

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t key_hash(std::uint64_t seed, Kind kind, std::uint64_t a,
                       std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix(seed ^ 0xA5F152E9D3B10C47ULL);
    h = mix(h ^ static_cast<std::uint64_t>(kind) * 0x9E3779B97F4A7C15ULL);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
}

double uniform01(std::uint64_t h) {
    // 53 high bits, offset by half an ulp so the result is strictly inside (0,1).
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t seed, Kind kind, std::uint64_t a,
              std::uint64_t b, std::uint64_t c) {
    return stats::norm_quantile(uniform01(key_hash(seed, kind, a, b, c)));
}

bool bernoulli(double p, std::uint64_t seed, Kind kind, std::uint64_t a,
               std::uint64_t b, std::uint64_t c) {
    return uniform01(key_hash(seed, kind, a, b, c)) < p;
}

}  // namespace labelmeas::rng
