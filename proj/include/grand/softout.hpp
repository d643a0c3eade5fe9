#ifndef GRAND_SOFTOUT_HPP
#define GRAND_SOFTOUT_HPP

// Online decoding confidence for any GRAND query order.
//
// Correct hypothesis: the true noise effect is among the first q queries,
// P(G <= q) = sum_{j<=q} P(N = z_j), kept as a log-domain running sum.
// Incorrect hypothesis: some other code-word is hit within q queries. Each
// query is modelled as an independent hit with probability 2^-(n-k), so
// P(U <= q) = 1 - (1 - 2^-(n-k))^q.
// LLR(q) = log2 P(G <= q) - log2 P(U <= q); LLR = t means 2^t : 1 odds that a
// decoding found at query q is correct.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "grand/channel.hpp"

namespace grand {

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log_add_exp(double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = a > b ? a : b;
    return hi + std::log1p(std::exp(-std::fabs(a - b)));
}

/// log(1 - e^x) for x <= 0.
inline double log1m_exp(double x) {
    if (x >= 0.0) return neg_inf;
    return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace detail

/// Per-query probability that a query lands on an erroneous code-word.
struct IncorrectModel {
    std::size_t redundancy = 1;
    double log_hit = -std::numbers::ln2;   // log of per-query hit probability
    double log_miss = -std::numbers::ln2;  // log(1 - hit)

    /// 2^-(n-k): the model used for all reported results.
    static IncorrectModel geometric(std::size_t redundancy) {
        if (redundancy < 1) throw std::invalid_argument("IncorrectModel: redundancy must be >= 1");
        IncorrectModel m;
        m.redundancy = redundancy;
        m.log_hit = -static_cast<double>(redundancy) * std::numbers::ln2;
        m.log_miss = std::log1p(-std::exp(m.log_hit));
        return m;
    }

    /// 2^k / (2^n - 1): random codebook, uniformly random queries.
    static IncorrectModel exact_random_codebook(std::size_t n, std::size_t k) {
        if (k >= n) throw std::invalid_argument("IncorrectModel: require k < n");
        IncorrectModel m = geometric(n - k);
        m.log_hit -= std::log1p(-std::ldexp(1.0, -static_cast<int>(n)));
        m.log_miss = std::log1p(-std::exp(m.log_hit));
        return m;
    }

    /// log P(U <= q).
    double log_cum(std::uint64_t q) const {
        if (q == 0) return detail::neg_inf;
        return detail::log1m_exp(static_cast<double>(q) * log_miss);
    }
};

/// P(U <= q) = 1 - (1 - 2^-redundancy)^q.
inline double p_incorrect_cum(std::size_t redundancy, std::uint64_t q) {
    if (q == 0) return 0.0;
    const auto m = IncorrectModel::geometric(redundancy);
    return -std::expm1(static_cast<double>(q) * m.log_miss);
}

/// Per-bit log terms of the noise model used for accounting. Independent of
/// whatever produced the query order.
class AccountingModel {
public:
    static AccountingModel from_flip_probs(std::span<const double> flip_prob) {
        AccountingModel a;
        a.log_ratio_.resize(flip_prob.size());
        for (std::size_t i = 0; i < flip_prob.size(); ++i) {
            const double b = flip_prob[i];
            if (!(b >= 0.0 && b <= 0.5)) throw std::domain_error("AccountingModel: flip probability outside [0, 0.5]");
            const double l1 = std::log1p(-b);
            a.base_ += l1;
            a.log_ratio_[i] = std::log(b) - l1;
        }
        return a;
    }

    /// From reliabilities l directly: log B = -l - log(1 + e^-l), so very
    /// reliable bits never underflow to B = 0.
    static AccountingModel from_reliabilities(std::span<const double> reliab) {
        AccountingModel a;
        a.log_ratio_.resize(reliab.size());
        for (std::size_t i = 0; i < reliab.size(); ++i) {
            const double l = reliab[i];
            if (!(l >= 0.0)) throw std::domain_error("AccountingModel: reliability must be nonnegative");
            a.base_ -= std::log1p(std::exp(-l));
            a.log_ratio_[i] = -l;
        }
        return a;
    }

    static AccountingModel from_observation(const SoftObservation& obs) { return from_reliabilities(obs.reliab); }

    /// Hard detection: every bit flipped with the BSC crossover probability.
    static AccountingModel bsc(std::size_t n, double p) {
        std::vector<double> b(n, p);
        return from_flip_probs(b);
    }

    std::size_t size() const noexcept { return log_ratio_.size(); }
    double base_log() const noexcept { return base_; }
    double log_ratio(std::size_t i) const { return log_ratio_[i]; }

    double pattern_log_prob(std::span<const std::uint32_t> positions) const {
        double lp = base_;
        for (auto i : positions) lp += log_ratio_[i];
        return lp;
    }

private:
    double base_ = 0.0;
    std::vector<double> log_ratio_;
};

struct LlrReport {
    double llr_bits = 0.0;
    double p_correct_cum = 0.0;
    double p_incorrect_cum = 0.0;
    double log2_p_correct_cum = 0.0;    // exact fields: llr_bits is their difference
    double log2_p_incorrect_cum = 0.0;
    std::uint64_t q = 0;
};

struct ConditionalLlr {
    double bits = 0.0;
    bool saturated = false;  // P(G > q) vanished; bits is +inf
};

class ConfidenceLedger {
public:
    explicit ConfidenceLedger(std::size_t redundancy) : incorrect_(IncorrectModel::geometric(redundancy)) {}
    explicit ConfidenceLedger(IncorrectModel model) : incorrect_(model) {}

    /// Adds one query's noise-effect log-probability to the running sum.
    void record_query(double pattern_log_prob) {
        if (pattern_log_prob > 0.0 || std::isnan(pattern_log_prob))
            throw std::domain_error("record_query: log-probability must be <= 0");
        ++q_;
        cum_correct_log_ = detail::log_add_exp(cum_correct_log_, pattern_log_prob);
        last_pattern_log_ = pattern_log_prob;
    }

    std::uint64_t q() const noexcept { return q_; }
    double cum_correct_log() const noexcept { return cum_correct_log_; }
    double last_pattern_log() const noexcept { return last_pattern_log_; }
    std::size_t redundancy() const noexcept { return incorrect_.redundancy; }
    const IncorrectModel& incorrect_model() const noexcept { return incorrect_; }

    /// LLR(q) in bits.
    double llr_bits() const {
        if (q_ == 0) throw std::logic_error("confidence_llr: no query recorded yet");
        return (cum_correct_log_ - incorrect_.log_cum(q_)) / std::numbers::ln2;
    }

private:
    IncorrectModel incorrect_;
    std::uint64_t q_ = 0;
    double cum_correct_log_ = detail::neg_inf;
    double last_pattern_log_ = detail::neg_inf;
};

inline void record_query(ConfidenceLedger& ledger, double pattern_log_prob) { ledger.record_query(pattern_log_prob); }

inline LlrReport confidence_llr(const ConfidenceLedger& ledger) {
    LlrReport r;
    r.q = ledger.q();
    r.llr_bits = ledger.llr_bits();
    const double inc = ledger.incorrect_model().log_cum(r.q);
    r.log2_p_correct_cum = ledger.cum_correct_log() / std::numbers::ln2;
    r.log2_p_incorrect_cum = inc / std::numbers::ln2;
    r.p_correct_cum = std::exp(ledger.cum_correct_log());
    r.p_incorrect_cum = std::exp(inc);
    return r;
}

/// log2 of P(G=q) P(U>q) / (P(U=q) P(G>q)), using the most recent query as
/// P(G=q). Diagnostic only; the decoder never abandons on it.
inline ConditionalLlr conditional_llr(const ConfidenceLedger& ledger) {
    const std::uint64_t q = ledger.q();
    if (q == 0) throw std::logic_error("conditional_llr: no query recorded yet");
    const auto& m = ledger.incorrect_model();
    const double log_g_eq = ledger.last_pattern_log();
    // below ~1e-15 the remaining mass is rounding noise
    const double log_g_gt =
        ledger.cum_correct_log() >= -1e-15 ? detail::neg_inf : detail::log1m_exp(ledger.cum_correct_log());
    const double log_u_gt = static_cast<double>(q) * m.log_miss;
    const double log_u_eq = static_cast<double>(q - 1) * m.log_miss + m.log_hit;
    if (log_g_gt == detail::neg_inf) return {std::numeric_limits<double>::infinity(), true};
    return {(log_g_eq + log_u_gt - log_u_eq - log_g_gt) / std::numbers::ln2, false};
}

}  // namespace grand

#endif  // GRAND_SOFTOUT_HPP
