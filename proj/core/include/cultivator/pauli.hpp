#pragma once

#include <string>
#include <string_view>

#include "cultivator/common.hpp"

namespace cultiv {

// n-qubit Pauli operator stored as P = i^phase * X^xs * Z^zs with phase in Z4.
// The displayed sign of the letter form (e.g. "-XZIY") is i^(phase - #Y) since
// every Y letter contributes one factor of i to the internal phase.
struct PauliString {
    size_t n = 0;
    std::vector<u64> xs, zs;
    u8 phase = 0;  // exponent of i, mod 4

    PauliString() = default;
    explicit PauliString(size_t n_) : n(n_), xs(word_count(n_)), zs(word_count(n_)) {}

    static PauliString identity(size_t n) { return PauliString(n); }
    static PauliString single(size_t n, size_t q, char letter);
    static PauliString from_text(std::string_view text);

    bool x(size_t q) const { return get_bit(xs, q); }
    bool z(size_t q) const { return get_bit(zs, q); }
    void set_x(size_t q, bool v) { set_bit(xs, q, v); }
    void set_z(size_t q, bool v) { set_bit(zs, q, v); }
    void set(size_t q, char letter);
    char letter(size_t q) const;

    size_t weight() const;
    bool is_identity_up_to_phase() const { return !any_word(xs) && !any_word(zs); }

    // Exponent of i in front of the letter string, mod 4 (0:+1, 1:+i, 2:-1, 3:-i).
    int display_phase() const;

    bool commutes_with(const PauliString &other) const;

    PauliString &operator*=(const PauliString &rhs);
    friend PauliString operator*(PauliString a, const PauliString &b) { return a *= b; }
    bool operator==(const PauliString &o) const {
        return n == o.n && phase == o.phase && xs == o.xs && zs == o.zs;
    }

    std::string text() const;
};

}  // namespace cultiv
