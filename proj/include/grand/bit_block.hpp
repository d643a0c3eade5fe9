#ifndef GRAND_BIT_BLOCK_HPP
#define GRAND_BIT_BLOCK_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace grand {

/// Fixed-length binary word. Bit i lives in word i / 64 at bit i % 64; unused
/// high bits of the last word are always zero.
class BitBlock {
public:
    BitBlock() = default;
    explicit BitBlock(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BitBlock from_string(const std::string& bits) {
        BitBlock b(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1')
                b.set(i, true);
            else if (bits[i] != '0')
                throw std::invalid_argument("BitBlock::from_string: expected '0' or '1'");
        }
        return b;
    }

    std::size_t size() const noexcept { return n_; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    bool operator[](std::size_t i) const { return get(i); }

    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::size_t popcount() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool none() const noexcept {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    BitBlock& operator^=(const BitBlock& o) {
        if (o.n_ != n_) throw std::invalid_argument("BitBlock: length mismatch in XOR");
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
        return *this;
    }

    friend BitBlock operator^(BitBlock a, const BitBlock& b) { return a ^= b; }

    friend bool operator==(const BitBlock&, const BitBlock&) = default;

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    /// First `len` bits starting at `first`.
    BitBlock slice(std::size_t first, std::size_t len) const {
        if (first + len > n_) throw std::out_of_range("BitBlock::slice out of range");
        BitBlock out(len);
        for (std::size_t i = 0; i < len; ++i)
            if (get(first + i)) out.set(i, true);
        return out;
    }

    std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    /// Hex rendering, bit 0 as the most significant bit of the first nibble.
    /// The final nibble is zero-padded on the right.
    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string s;
        for (std::size_t i = 0; i < n_; i += 4) {
            unsigned nib = 0;
            for (std::size_t j = 0; j < 4; ++j) {
                nib <<= 1;
                if (i + j < n_ && get(i + j)) nib |= 1u;
            }
            s.push_back(digits[nib]);
        }
        return s;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace grand

#endif  // GRAND_BIT_BLOCK_HPP
