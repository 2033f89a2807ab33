#pragma once

#include <cstdint>
#include <string_view>

namespace labelmeas::rng {

/// Entity kinds for counter-based draws. Draws are keyed by
/// (seed, kind, indices), so enlarging one dimension of a design never
/// perturbs draws for existing entities.
enum class Kind : std::uint64_t {
    Item = 1,
    Annotator = 2,
    Session = 3,       // (annotator, trial) situational effect
    TrialShared = 4,   // trial-level effect shared across annotators/items
    CellNoise = 5,     // per-(item, annotator, trial) noise
    Interp = 6,        // (item, annotator) interpretive deviation
    Outcome = 7,       // correctness Bernoulli draw
    PairLabeler = 8,
    PairJudge = 9,
    PairItem = 10,
    PairInteraction = 11,
    PairOutcome = 12,
};

std::uint64_t mix(std::uint64_t x);

/// Stateless hash of (seed, kind, a, b, c) to a uniform 64-bit word.
std::uint64_t key_hash(std::uint64_t seed, Kind kind, std::uint64_t a,
                       std::uint64_t b = 0, std::uint64_t c = 0);

/// Uniform draw in (0,1) from a hashed key (never exactly 0 or 1).
double uniform01(std::uint64_t h);

/// Standard normal draw via the inverse CDF of a keyed uniform.
double normal(std::uint64_t seed, Kind kind, std::uint64_t a,
              std::uint64_t b = 0, std::uint64_t c = 0);

/// Bernoulli draw with success probability p.
bool bernoulli(double p, std::uint64_t seed, Kind kind, std::uint64_t a,
               std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace labelmeas::rng
