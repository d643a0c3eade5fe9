#ifndef GRAND_PATTERNS_HPP
#define GRAND_PATTERNS_HPP

// Noise-effect query orders.
//
// Hamming: nondecreasing number of flips, ties lexicographic on the sorted
// position list.
//
// LogisticRank (basic ORBGRAND): nondecreasing logistic weight W, the sum of
// reliability ranks of the flipped bits (rank 1 = least reliable). Each W is
// walked through its partitions into distinct parts <= n, fewer parts first,
// then lexicographic on the ascending part list. Ranks map to bit positions
// through the observation's reliability order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grand/channel.hpp"

namespace grand {

enum class OrderKind { Hamming, LogisticRank };

inline const char* to_string(OrderKind k) { return k == OrderKind::Hamming ? "hamming" : "logistic"; }

struct QueryPattern {
    std::vector<std::uint32_t> positions;  // 0-based bit indices
    std::uint64_t weight = 0;
};

/// Resumable generator position. Plain data; copy it to suspend, pass it back
/// to the generator constructor to resume.
struct GeneratorState {
    OrderKind kind = OrderKind::LogisticRank;
    std::uint32_t n = 0;
    std::uint64_t weight = 0;
    std::vector<std::uint32_t> parts;  // ascending 1-based ranks of the current pattern
    std::uint64_t emitted = 0;
    bool exhausted = false;

    std::string serialize() const {
        std::ostringstream os;
        os << (kind == OrderKind::Hamming ? 'H' : 'L') << ' ' << n << ' ' << weight << ' ' << emitted << ' '
           << exhausted << ' ' << parts.size();
        for (auto p : parts) os << ' ' << p;
        return os.str();
    }

    static GeneratorState deserialize(const std::string& text) {
        std::istringstream is(text);
        GeneratorState s;
        char kind = 0;
        std::size_t m = 0;
        if (!(is >> kind >> s.n >> s.weight >> s.emitted >> s.exhausted >> m) || (kind != 'H' && kind != 'L'))
            throw std::invalid_argument("GeneratorState: malformed state string");
        s.kind = kind == 'H' ? OrderKind::Hamming : OrderKind::LogisticRank;
        s.parts.resize(m);
        for (auto& p : s.parts)
            if (!(is >> p) || p == 0 || p > s.n) throw std::invalid_argument("GeneratorState: bad part");
        return s;
    }
};

class PatternGenerator {
public:
    static constexpr std::uint64_t unlimited = std::numeric_limits<std::uint64_t>::max();

    /// `rank_order[r]` is the bit index holding rank r + 1; empty means identity.
    PatternGenerator(OrderKind kind, std::size_t n, std::vector<std::uint32_t> rank_order = {},
                     std::uint64_t max_emissions = unlimited)
        : rank_order_(std::move(rank_order)), max_emissions_(max_emissions) {
        if (n == 0 || n > std::numeric_limits<std::uint32_t>::max() / 2)
            throw std::invalid_argument("PatternGenerator: bad block length");
        if (!rank_order_.empty() && rank_order_.size() != n)
            throw std::invalid_argument("PatternGenerator: rank order length differs from n");
        state_.kind = kind;
        state_.n = static_cast<std::uint32_t>(n);
        if (rank_order_.empty()) {
            rank_order_.resize(n);
            for (std::uint32_t i = 0; i < n; ++i) rank_order_[i] = i;
        }
    }

    PatternGenerator(GeneratorState state, std::vector<std::uint32_t> rank_order = {},
                     std::uint64_t max_emissions = unlimited)
        : PatternGenerator(state.kind, state.n, std::move(rank_order), max_emissions) {
        state_ = std::move(state);
        sync_positions();
    }

    static PatternGenerator orbgrand(const SoftObservation& obs, std::uint64_t max_emissions = unlimited) {
        return PatternGenerator(OrderKind::LogisticRank, obs.size(), obs.ranks, max_emissions);
    }

    /// Moves to the next pattern. Returns false once all 2^n patterns (or the
    /// emission cap) have been produced.
    bool advance() {
        if (state_.exhausted) return false;
        if (state_.emitted >= max_emissions_) return false;
        const bool ok = state_.emitted == 0 ? true
                        : state_.kind == OrderKind::Hamming ? step_hamming()
                                                            : step_logistic();
        if (!ok) {
            state_.exhausted = true;
            state_.parts.clear();
            positions_.clear();
            return false;
        }
        ++state_.emitted;
        sync_positions();
        return true;
    }

    std::optional<QueryPattern> next() {
        if (!advance()) return std::nullopt;
        return QueryPattern{positions_, state_.weight};
    }

    /// Bit positions of the current pattern, in ascending rank order.
    std::span<const std::uint32_t> positions() const noexcept { return positions_; }
    /// 1-based ranks of the current pattern (positions + 1 for Hamming).
    std::span<const std::uint32_t> ranks() const noexcept { return state_.parts; }
    std::uint64_t weight() const noexcept { return state_.weight; }
    std::uint64_t emitted() const noexcept { return state_.emitted; }
    const GeneratorState& state() const noexcept { return state_; }
    const std::vector<std::uint32_t>& rank_order() const noexcept { return rank_order_; }

private:
    void sync_positions() {
        positions_.resize(state_.parts.size());
        for (std::size_t i = 0; i < state_.parts.size(); ++i) positions_[i] = rank_order_[state_.parts[i] - 1];
    }

    bool step_hamming() {
        auto& c = state_.parts;
        const std::uint32_t n = state_.n;
        const std::size_t w = c.size();
        for (std::size_t i = w; i-- > 0;) {
            if (c[i] < n - (w - 1 - i)) {
                ++c[i];
                for (std::size_t j = i + 1; j < w; ++j) c[j] = c[j - 1] + 1;
                return true;
            }
        }
        if (w == n) return false;
        c.resize(w + 1);
        for (std::size_t j = 0; j <= w; ++j) c[j] = static_cast<std::uint32_t>(j + 1);
        state_.weight = w + 1;
        return true;
    }

    // Writes into parts[from..from+count) the lexicographically smallest
    // strictly increasing run of `count` values in [lower, n] summing to `sum`.
    // Leaves parts[0..from) untouched.
    bool first_completion(std::size_t from, std::uint64_t lower, std::size_t count, std::uint64_t sum) {
        const std::uint64_t n = state_.n;
        auto& a = state_.parts;
        a.resize(from + count);
        for (std::size_t j = 0; j < count; ++j) {
            const std::uint64_t c = count - j;  // values still to place, this one included
            std::uint64_t v;
            if (c == 1) {
                v = sum;
                if (v < lower || v > n) return false;
            } else {
                // the c - 1 values after v lie in (v, n]
                if (c > n) return false;
                const std::uint64_t max_tail = (c - 1) * n - (c - 1) * (c - 2) / 2;
                const std::uint64_t tri = c * (c - 1) / 2;
                if (sum < tri) return false;
                const std::uint64_t hi = std::min<std::uint64_t>(n - c + 1, (sum - tri) / c);
                v = lower;
                if (sum > max_tail && sum - max_tail > v) v = sum - max_tail;
                if (v > hi) return false;
            }
            a[from + j] = static_cast<std::uint32_t>(v);
            sum -= v;
            lower = v + 1;
        }
        return true;
    }

    bool step_logistic() {
        auto& a = state_.parts;
        const std::uint64_t n = state_.n;
        const std::uint64_t w = state_.weight;
        const std::size_t m = a.size();

        // Next partition of w with m distinct parts.
        if (m >= 2) {
            std::uint64_t prefix = 0;
            for (std::size_t i = 0; i + 1 < m; ++i) prefix += a[i];
            for (std::size_t i = m - 1; i-- > 0;) {
                prefix -= a[i];
                if (first_completion(i, std::uint64_t{a[i]} + 1, m - i, w - prefix)) return true;
            }
        }

        const std::uint64_t w_max = n * (n + 1) / 2;
        std::size_t parts = m + 1;
        for (std::uint64_t weight = w; weight <= w_max; ++weight, parts = 1) {
            for (; parts <= n && parts * (parts + 1) / 2 <= weight; ++parts) {
                if (first_completion(0, 1, parts, weight)) {
                    state_.weight = weight;
                    return true;
                }
            }
        }
        return false;
    }

    GeneratorState state_;
    std::vector<std::uint32_t> rank_order_;
    std::vector<std::uint32_t> positions_;
    std::uint64_t max_emissions_;
};

/// Natural-log probability that the noise effect equals `pattern`, with bits
/// flipped independently with probabilities obs.flip_prob.
inline double pattern_log_probability(const QueryPattern& pattern, const SoftObservation& obs) {
    double lp = 0.0;
    for (double l : obs.reliab) lp -= std::log1p(std::exp(-l));
    for (auto i : pattern.positions) {
        if (i >= obs.size()) throw std::out_of_range("pattern_log_probability: position out of range");
        lp -= obs.reliab[i];
    }
    return lp;
}

}  // namespace grand

#endif  // GRAND_PATTERNS_HPP
