#ifndef GRAND_DECODER_HPP
#define GRAND_DECODER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>

#include "grand/codes.hpp"
#include "grand/patterns.hpp"
#include "grand/softout.hpp"

namespace grand {

struct DecodePolicy {
    std::optional<double> tau;  // abandonment threshold in bits; nullopt never abandons on LLR
    std::uint64_t max_queries = 1;
    OrderKind order = OrderKind::LogisticRank;

    void validate() const {
        if (max_queries < 1) throw std::invalid_argument("DecodePolicy: max_queries must be >= 1");
        if (tau && std::isnan(*tau)) throw std::invalid_argument("DecodePolicy: tau is NaN");
    }
};

/// 2^(n-k) · 8, saturating.
inline std::uint64_t default_max_queries(const LinearCode& code) {
    const std::size_t r = code.redundancy();
    if (r >= 60) return std::numeric_limits<std::uint64_t>::max();
    return std::uint64_t{8} << r;
}

inline DecodePolicy orbgrand_policy(const LinearCode& code, std::optional<double> tau = std::nullopt) {
    return {tau, default_max_queries(code), OrderKind::LogisticRank};
}

inline DecodePolicy grand_policy(const LinearCode& code, std::optional<double> tau = std::nullopt) {
    return {tau, default_max_queries(code), OrderKind::Hamming};
}

enum class AbandonReason { LlrBelowTau, QueryCapReached };

inline const char* to_string(AbandonReason r) {
    return r == AbandonReason::LlrBelowTau ? "llr_below_tau" : "query_cap";
}

struct Decoded {
    BitBlock word;
    BitBlock noise;  // the pattern that produced `word`
    std::uint64_t q = 0;
    LlrReport report;
};

struct Abandoned {
    std::uint64_t q = 0;
    AbandonReason reason = AbandonReason::QueryCapReached;
};

using DecodeOutcome = std::variant<Decoded, Abandoned>;

inline std::uint64_t queries_used(const DecodeOutcome& o) {
    return std::visit([](const auto& v) { return v.q; }, o);
}

/// GRAND with LLR-thresholded abandonment. LLR(q) includes the q-th pattern's
/// probability and is checked before the q-th membership test; decoding is
/// abandoned when LLR(q) < tau.
inline DecodeOutcome decode(const LinearCode& code, const SoftObservation& obs, const DecodePolicy& policy,
                            const AccountingModel& accounting) {
    policy.validate();
    if (obs.size() != code.n()) throw std::invalid_argument("decode: observation length differs from n");
    if (accounting.size() != code.n()) throw std::invalid_argument("decode: accounting length differs from n");

    PatternGenerator gen = policy.order == OrderKind::LogisticRank
                               ? PatternGenerator(OrderKind::LogisticRank, code.n(), obs.ranks)
                               : PatternGenerator(OrderKind::Hamming, code.n());
    ConfidenceLedger ledger(code.redundancy());
    const std::uint64_t hard_syndrome = code.syndrome(obs.hard);

    std::uint64_t q = 0;
    while (gen.advance()) {
        ++q;
        const auto positions = gen.positions();
        ledger.record_query(accounting.pattern_log_prob(positions));
        if (policy.tau && ledger.llr_bits() < *policy.tau) return Abandoned{q, AbandonReason::LlrBelowTau};

        std::uint64_t s = hard_syndrome;
        for (auto i : positions) s ^= code.column(i);
        if (s == 0) {
            Decoded d{obs.hard, BitBlock(code.n()), q, confidence_llr(ledger)};
            for (auto i : positions) {
                d.word.flip(i);
                d.noise.set(i, true);
            }
            return d;
        }
        if (q >= policy.max_queries) return Abandoned{q, AbandonReason::QueryCapReached};
    }
    return Abandoned{q, AbandonReason::QueryCapReached};
}

inline DecodeOutcome decode(const LinearCode& code, const SoftObservation& obs, const DecodePolicy& policy) {
    return decode(code, obs, policy, AccountingModel::from_observation(obs));
}

inline BitBlock extract_message(const LinearCode& code, const BitBlock& word) {
    if (!is_codeword(code, word)) throw std::invalid_argument("extract_message: not a code-word");
    return word.slice(0, code.k());
}

}  // namespace grand

#endif  // GRAND_DECODER_HPP
