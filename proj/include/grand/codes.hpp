#ifndef GRAND_CODES_HPP
#define GRAND_CODES_HPP

// Binary systematic linear block codes: random linear codes and CRC codes.
//
// Both kinds share one representation: the parity-check matrix is [A | I_r]
// with r = n - k, stored column-wise as r-bit syndromes (row t of H is bit t
// of every column). Code-words are the message followed by r parity bits.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "grand/bit_block.hpp"

namespace grand {

enum class CodeKind { Rlc, Crc };

inline const char* to_string(CodeKind k) { return k == CodeKind::Rlc ? "rlc" : "crc"; }

class LinearCode {
public:
    static constexpr std::size_t max_redundancy = 64;

    LinearCode(CodeKind kind, std::size_t n, std::size_t k, std::vector<std::uint64_t> columns,
               std::uint64_t parameter)
        : kind_(kind), n_(n), k_(k), parameter_(parameter), columns_(std::move(columns)) {
        if (k_ == 0 || k_ >= n_) throw std::invalid_argument("LinearCode: require 0 < k < n");
        if (n_ - k_ > max_redundancy) throw std::invalid_argument("LinearCode: n - k exceeds 64");
        if (columns_.size() != n_) throw std::invalid_argument("LinearCode: need one column per bit");
    }

    CodeKind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t redundancy() const noexcept { return n_ - k_; }
    double rate() const noexcept { return static_cast<double>(k_) / static_cast<double>(n_); }

    /// RLC seed or CRC polynomial in Koopman notation.
    std::uint64_t parameter() const noexcept { return parameter_; }

    /// Column i of the parity-check matrix as an r-bit syndrome.
    std::uint64_t column(std::size_t i) const { return columns_[i]; }
    const std::vector<std::uint64_t>& columns() const noexcept { return columns_; }

    std::uint64_t syndrome(const BitBlock& word) const {
        if (word.size() != n_) throw std::invalid_argument("syndrome: word length differs from n");
        std::uint64_t s = 0;
        const auto& w = word.words();
        for (std::size_t wi = 0; wi < w.size(); ++wi) {
            for (std::uint64_t bits = w[wi]; bits; bits &= bits - 1)
                s ^= columns_[wi * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
        }
        return s;
    }

    /// Parity-check rows (r × n).
    std::vector<BitBlock> parity_check() const {
        std::vector<BitBlock> rows(redundancy(), BitBlock(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t t = 0; t < redundancy(); ++t)
                if ((columns_[i] >> t) & 1u) rows[t].set(i, true);
        return rows;
    }

    /// Systematic generator rows (k × n): [I_k | Aᵀ].
    std::vector<BitBlock> generator() const {
        std::vector<BitBlock> rows(k_, BitBlock(n_));
        for (std::size_t i = 0; i < k_; ++i) {
            rows[i].set(i, true);
            for (std::size_t t = 0; t < redundancy(); ++t)
                if ((columns_[i] >> t) & 1u) rows[i].set(k_ + t, true);
        }
        return rows;
    }

    /// "rlc:n:k:seed" or "crc:n:k:0xpoly".
    std::string descriptor() const {
        std::ostringstream os;
        os << to_string(kind_) << ':' << n_ << ':' << k_ << ':';
        if (kind_ == CodeKind::Crc)
            os << "0x" << std::hex << parameter_;
        else
            os << parameter_;
        return os.str();
    }

private:
    CodeKind kind_;
    std::size_t n_;
    std::size_t k_;
    std::uint64_t parameter_;
    std::vector<std::uint64_t> columns_;
};

namespace detail {

inline std::uint64_t low_mask(std::size_t bits) {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

inline std::uint64_t reverse_low_bits(std::uint64_t v, std::size_t bits) {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < bits; ++i)
        if ((v >> i) & 1u) out |= std::uint64_t{1} << (bits - 1 - i);
    return out;
}

}  // namespace detail

/// Random linear code with parity-check [A | I_r]. A is drawn column by column
/// (ascending) from a seeded Bernoulli(1/2) source; a column is redrawn while it
/// is zero or repeats any column of the full matrix. If some row of A ends up
/// all-zero the whole draw restarts on the same stream.
inline LinearCode make_rlc(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k >= n) throw std::invalid_argument("make_rlc: require 0 < k < n");
    const std::size_t r = n - k;
    if (r < 2) throw std::invalid_argument("make_rlc: require n - k >= 2");
    if (r > LinearCode::max_redundancy) throw std::invalid_argument("make_rlc: n - k exceeds 64");
    if (r < 64 && n > (std::uint64_t{1} << r) - 1)
        throw std::invalid_argument("make_rlc: n > 2^(n-k) - 1, distinct nonzero columns impossible");

    const std::uint64_t mask = detail::low_mask(r);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x524c43u};
    std::mt19937_64 rng(seq);

    std::vector<std::uint64_t> cols(n);
    for (;;) {
        std::unordered_set<std::uint64_t> used;
        for (std::size_t t = 0; t < r; ++t) used.insert(std::uint64_t{1} << t);
        std::uint64_t row_cover = 0;
        for (std::size_t i = 0; i < k; ++i) {
            std::uint64_t c;
            do {
                c = rng() & mask;
            } while (c == 0 || used.contains(c));
            used.insert(c);
            cols[i] = c;
            row_cover |= c;
        }
        if (row_cover == mask) break;
    }
    for (std::size_t t = 0; t < r; ++t) cols[k + t] = std::uint64_t{1} << t;
    return LinearCode(CodeKind::Rlc, n, k, std::move(cols), seed);
}

/// Remainder of the n-bit word w(x) = Σ w_i x^{n-1-i} divided by the CRC
/// polynomial given in Koopman notation, returned with coefficient of x^d at
/// bit d. Koopman notation drops the implicit +1 term: 0x5 is x^3 + x + 1.
inline std::uint64_t crc_remainder(const BitBlock& word, std::uint64_t poly_koopman) {
    if (poly_koopman == 0) throw std::invalid_argument("crc_remainder: zero polynomial");
    const std::size_t r = static_cast<std::size_t>(std::bit_width(poly_koopman));
    const std::uint64_t mask = detail::low_mask(r);
    const std::uint64_t low = ((poly_koopman << 1) | 1u) & mask;
    std::uint64_t reg = 0;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const bool top = (reg >> (r - 1)) & 1u;
        reg = ((reg << 1) | static_cast<std::uint64_t>(word.get(i))) & mask;
        if (top) reg ^= low;
    }
    return reg;
}

/// CRC code: message followed by the remainder of m(x)·x^r mod g(x), first
/// bit = highest degree coefficient.
inline LinearCode make_crc(std::size_t n, std::size_t k, std::uint64_t poly_koopman) {
    if (poly_koopman == 0) throw std::invalid_argument("make_crc: zero polynomial");
    if (k == 0 || k >= n) throw std::invalid_argument("make_crc: require 0 < k < n");
    const std::size_t r = n - k;
    if (static_cast<std::size_t>(std::bit_width(poly_koopman)) != r) {
        std::ostringstream os;
        os << "make_crc: polynomial 0x" << std::hex << poly_koopman << " has degree " << std::dec
           << std::bit_width(poly_koopman) << " but n - k = " << r;
        throw std::invalid_argument(os.str());
    }
    const std::uint64_t mask = detail::low_mask(r);
    const std::uint64_t low = ((poly_koopman << 1) | 1u) & mask;

    // rem = x^e mod g, natural bit order; column for position n-1-e.
    std::vector<std::uint64_t> cols(n);
    std::uint64_t rem = 1;
    for (std::size_t e = 0; e < n; ++e) {
        cols[n - 1 - e] = detail::reverse_low_bits(rem, r);
        const bool top = (rem >> (r - 1)) & 1u;
        rem = (rem << 1) & mask;
        if (top) rem ^= low;
    }
    return LinearCode(CodeKind::Crc, n, k, std::move(cols), poly_koopman);
}

inline BitBlock encode(const LinearCode& code, const BitBlock& message) {
    if (message.size() != code.k()) throw std::invalid_argument("encode: message length differs from k");
    BitBlock word(code.n());
    std::uint64_t parity = 0;
    for (std::size_t i = 0; i < code.k(); ++i) {
        if (message.get(i)) {
            word.set(i, true);
            parity ^= code.column(i);
        }
    }
    for (std::size_t t = 0; t < code.redundancy(); ++t)
        if ((parity >> t) & 1u) word.set(code.k() + t, true);
    return word;
}

inline bool is_codeword(const LinearCode& code, const BitBlock& word) {
    if (word.size() != code.n()) throw std::invalid_argument("is_codeword: word length differs from n");
    return code.syndrome(word) == 0;
}

}  // namespace grand

#endif  // GRAND_CODES_HPP
