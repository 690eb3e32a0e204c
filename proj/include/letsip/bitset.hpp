#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace letsip {

/// Fixed-width bit vector packed into 64-bit words. Unused high bits of the
/// last word are always zero so popcount and equality need no masking.
class Bitset {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    Bitset() = default;
    explicit Bitset(std::size_t nbits, bool value = false)
        : words_((nbits + kWordBits - 1) / kWordBits, value ? ~Word{0} : Word{0}), nbits_(nbits) {
        trim();
    }

    /// Copies word_count() words; bits beyond nbits must be zero.
    static Bitset from_words(const Word* words, std::size_t nbits) {
        Bitset b(nbits);
        for (std::size_t i = 0; i < b.words_.size(); ++i) b.words_[i] = words[i];
        return b;
    }

    std::size_t size() const noexcept { return nbits_; }
    std::size_t word_count() const noexcept { return words_.size(); }
    const Word* data() const noexcept { return words_.data(); }

    bool test(std::size_t i) const noexcept {
        assert(i < nbits_);
        return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
    }
    void set(std::size_t i, bool value = true) noexcept {
        assert(i < nbits_);
        const Word mask = Word{1} << (i % kWordBits);
        if (value) {
            words_[i / kWordBits] |= mask;
        } else {
            words_[i / kWordBits] &= ~mask;
        }
    }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    Bitset& operator&=(const Bitset& other) noexcept {
        assert(other.nbits_ == nbits_);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
        return *this;
    }
    Bitset& operator^=(const Bitset& other) noexcept {
        assert(other.nbits_ == nbits_);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
        return *this;
    }
    friend Bitset operator&(Bitset a, const Bitset& b) noexcept { return a &= b; }

    friend bool operator==(const Bitset&, const Bitset&) = default;

    /// popcount(a & b) without materializing the intersection.
    static std::size_t intersect_count(const Bitset& a, const Bitset& b) noexcept {
        assert(a.nbits_ == b.nbits_);
        std::size_t n = 0;
        for (std::size_t i = 0; i < a.words_.size(); ++i) {
            n += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
        }
        return n;
    }

    /// Calls fn(i) for every set bit in ascending order.
    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            Word bits = words_[w];
            while (bits != 0) {
                const int tz = std::countr_zero(bits);
                fn(w * kWordBits + static_cast<std::size_t>(tz));
                bits &= bits - 1;
            }
        }
    }

private:
    void trim() noexcept {
        const std::size_t rem = nbits_ % kWordBits;
        if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
    }

    std::vector<Word> words_;
    std::size_t nbits_ = 0;
};

}  // namespace letsip
