#ifndef GRAND_CHANNEL_HPP
#define GRAND_CHANNEL_HPP

// BPSK over complex AWGN. Only the in-phase dimension carries information, so
// each bit sees one real Gaussian sample. Symbol energy is 1 and the noise
// variance per real dimension is 1 / (2 · rate · Eb/N0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "grand/bit_block.hpp"
#include "grand/rng.hpp"

namespace grand {

struct ChannelParams {
    double ebn0_db = 0.0;
    double rate = 0.5;

    void validate() const {
        if (!std::isfinite(ebn0_db)) throw std::invalid_argument("ChannelParams: Eb/N0 must be finite");
        if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("ChannelParams: rate must be in (0, 1]");
    }

    double ebn0_linear() const { return std::pow(10.0, ebn0_db / 10.0); }
    double sigma2() const { return 1.0 / (2.0 * rate * ebn0_linear()); }
};

/// Demodulator output for one block.
struct SoftObservation {
    BitBlock hard;                     // hard decisions
    std::vector<double> reliab;        // |channel LLR|, natural log units
    std::vector<double> flip_prob;     // B_i
    std::vector<std::uint32_t> ranks;  // bit indices by ascending reliability, ties by index

    std::size_t size() const noexcept { return hard.size(); }
};

/// B = e^{-l} / (1 + e^{-l}), evaluated without overflow.
inline double flip_probability(double l) {
    if (!(l >= 0.0)) throw std::domain_error("flip_probability: reliability must be nonnegative");
    const double e = std::exp(-l);
    return e / (1.0 + e);
}

/// Builds an observation from per-bit channel LLRs (positive favours bit 0).
inline SoftObservation observe(std::span<const double> channel_llr) {
    const std::size_t n = channel_llr.size();
    SoftObservation obs;
    obs.hard = BitBlock(n);
    obs.reliab.resize(n);
    obs.flip_prob.resize(n);
    obs.ranks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = channel_llr[i];
        if (lam < 0.0) obs.hard.set(i, true);
        obs.reliab[i] = std::fabs(lam);
        obs.flip_prob[i] = flip_probability(obs.reliab[i]);
    }
    std::iota(obs.ranks.begin(), obs.ranks.end(), std::uint32_t{0});
    std::stable_sort(obs.ranks.begin(), obs.ranks.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return obs.reliab[a] < obs.reliab[b]; });
    return obs;
}

/// Draws the received block for one transmitted code-word.
inline SoftObservation transmit(const BitBlock& code_word, const ChannelParams& params, Rng& rng) {
    params.validate();
    const double sigma2 = params.sigma2();
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    std::vector<double> llr(code_word.size());
    for (std::size_t i = 0; i < code_word.size(); ++i) {
        const double s = code_word.get(i) ? -1.0 : 1.0;
        const double y = s + noise(rng);
        llr[i] = 2.0 * y / sigma2;
    }
    return observe(llr);
}

inline SoftObservation transmit(const BitBlock& code_word, const ChannelParams& params, std::uint64_t seed) {
    Rng rng = make_stream(seed);
    return transmit(code_word, params, rng);
}

/// Standard normal tail probability.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Hard-decision bit error probability of the equivalent BSC.
inline double bsc_crossover(const ChannelParams& params) {
    params.validate();
    return q_function(std::sqrt(2.0 * params.rate * params.ebn0_linear()));
}

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct CapacityMarkers {
    double shannon_ebn0_db;  // rate = 1 - h2(p)
    double mincap_ebn0_db;   // rate = 1 + log2(1 - p)
};

namespace detail {

// f is increasing in Eb/N0; returns the root to well under 1e-6 dB.
template <class F>
double bisect_ebn0(F f) {
    double lo = -40.0, hi = 80.0;
    if (f(lo) > 0.0 || f(hi) < 0.0) throw std::domain_error("capacity_markers: root not bracketed");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Eb/N0 values at which a hard-detection BSC reaches Shannon capacity and
/// min-capacity equal to `rate`.
inline CapacityMarkers capacity_markers(double rate) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("capacity_markers: rate must be in (0, 1)");
    auto p_at = [rate](double db) { return bsc_crossover({db, rate}); };
    CapacityMarkers m{};
    m.shannon_ebn0_db = detail::bisect_ebn0([&](double db) { return 1.0 - binary_entropy(p_at(db)) - rate; });
    m.mincap_ebn0_db = detail::bisect_ebn0([&](double db) { return 1.0 + std::log2(1.0 - p_at(db)) - rate; });
    return m;
}

}  // namespace grand

#endif  // GRAND_CHANNEL_HPP
