#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace tqo {

// Fixed-length GF(2) vector.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(int n) : n_(n), w_((n + 63) / 64, 0) {}

    int size() const { return n_; }
    bool get(int i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(int i, bool v = true) {
        auto m = std::uint64_t{1} << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }
    void flip(int i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    BitVec& operator^=(const BitVec& o) {
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
        return *this;
    }
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    friend BitVec operator&(BitVec a, const BitVec& b) {
        for (std::size_t k = 0; k < a.w_.size(); ++k) a.w_[k] &= b.w_[k];
        return a;
    }
    friend BitVec operator|(BitVec a, const BitVec& b) {
        for (std::size_t k = 0; k < a.w_.size(); ++k) a.w_[k] |= b.w_[k];
        return a;
    }
    bool operator==(const BitVec&) const = default;

    int count() const {
        int c = 0;
        for (auto w : w_) c += std::popcount(w);
        return c;
    }
    bool any() const {
        for (auto w : w_) if (w) return true;
        return false;
    }
    // parity of the overlap, i.e. the GF(2) dot product
    bool dot(const BitVec& o) const {
        std::uint64_t acc = 0;
        for (std::size_t k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
        return std::popcount(acc) & 1;
    }
    // number of common ones, used for exact phase bookkeeping
    int overlap(const BitVec& o) const {
        int c = 0;
        for (std::size_t k = 0; k < w_.size(); ++k) c += std::popcount(w_[k] & o.w_[k]);
        return c;
    }
    int first() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return int(k * 64) + std::countr_zero(w_[k]);
        return -1;
    }
    const std::vector<std::uint64_t>& words() const { return w_; }

private:
    int n_ = 0;
    std::vector<std::uint64_t> w_;
};

}  // namespace tqo
