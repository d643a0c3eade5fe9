#ifndef GRAND_RNG_HPP
#define GRAND_RNG_HPP

#include <cstdint>
#include <random>

namespace grand {

using Rng = std::mt19937_64;

/// Independent generator for stream (a, b) under a master seed. Every Monte
/// Carlo trial draws from its own stream so results do not depend on the
/// order in which workers finish.
inline Rng make_stream(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(a),      static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),      static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

}  // namespace grand

#endif  // GRAND_RNG_HPP
