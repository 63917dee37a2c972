#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cultiv {

using std::size_t;
using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;

struct Error : std::runtime_error {
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string &msg) { throw Error(msg); }

inline void require(bool cond, const std::string &msg) {
    if (!cond) fail(msg);
}

// ---- packed bit vectors -------------------------------------------------

inline size_t word_count(size_t bits) { return (bits + 63) / 64; }

inline bool get_bit(const std::vector<u64> &w, size_t i) {
    return (w[i >> 6] >> (i & 63)) & 1;
}

inline void set_bit(std::vector<u64> &w, size_t i, bool v) {
    u64 mask = u64(1) << (i & 63);
    if (v) w[i >> 6] |= mask; else w[i >> 6] &= ~mask;
}

inline void flip_bit(std::vector<u64> &w, size_t i) { w[i >> 6] ^= u64(1) << (i & 63); }

inline size_t popcount_words(const std::vector<u64> &w) {
    size_t c = 0;
    for (u64 x : w) c += size_t(__builtin_popcountll(x));
    return c;
}

inline size_t popcount_and(const std::vector<u64> &a, const std::vector<u64> &b) {
    size_t c = 0;
    for (size_t i = 0; i < a.size(); i++) c += size_t(__builtin_popcountll(a[i] & b[i]));
    return c;
}

inline void xor_into(std::vector<u64> &dst, const std::vector<u64> &src) {
    for (size_t i = 0; i < src.size(); i++) dst[i] ^= src[i];
}

inline bool any_word(const std::vector<u64> &w) {
    for (u64 x : w) if (x) return true;
    return false;
}

}  // namespace cultiv
