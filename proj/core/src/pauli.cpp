#include "cultivator/pauli.hpp"

namespace cultiv {

PauliString PauliString::single(size_t n, size_t q, char letter) {
    PauliString p(n);
    p.set(q, letter);
    return p;
}

void PauliString::set(size_t q, char letter) {
    switch (letter) {
        case 'I': case '_': set_x(q, false); set_z(q, false); break;
        case 'X': set_x(q, true); set_z(q, false); break;
        case 'Z': set_x(q, false); set_z(q, true); break;
        case 'Y': set_x(q, true); set_z(q, true); phase = u8((phase + 1) & 3); break;
        default: fail(std::string("bad Pauli letter '") + letter + "'");
    }
}

char PauliString::letter(size_t q) const {
    bool xv = x(q), zv = z(q);
    if (xv && zv) return 'Y';
    if (xv) return 'X';
    if (zv) return 'Z';
    return 'I';
}

size_t PauliString::weight() const {
    size_t c = 0;
    for (size_t i = 0; i < xs.size(); i++) c += size_t(__builtin_popcountll(xs[i] | zs[i]));
    return c;
}

int PauliString::display_phase() const {
    size_t y = popcount_and(xs, zs);
    return int((phase + 4 - (y & 3)) & 3);
}

bool PauliString::commutes_with(const PauliString &other) const {
    require(n == other.n, "Pauli size mismatch");
    size_t s = popcount_and(xs, other.zs) + popcount_and(zs, other.xs);
    return (s & 1) == 0;
}

PauliString &PauliString::operator*=(const PauliString &rhs) {
    require(n == rhs.n, "Pauli size mismatch");
    // X^a Z^b * X^c Z^d = (-1)^(b.c) X^(a^c) Z^(b^d)
    size_t anti = popcount_and(zs, rhs.xs);
    phase = u8((phase + rhs.phase + 2 * (anti & 1)) & 3);
    xor_into(xs, rhs.xs);
    xor_into(zs, rhs.zs);
    return *this;
}

std::string PauliString::text() const {
    static const char *prefix[4] = {"", "i", "-", "-i"};
    std::string out = prefix[display_phase()];
    out.reserve(out.size() + n);
    for (size_t q = 0; q < n; q++) out.push_back(letter(q));
    return out;
}

PauliString PauliString::from_text(std::string_view text) {
    int ph = 0;
    if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
        if (text[0] == '-') ph = 2;
        text.remove_prefix(1);
    }
    if (!text.empty() && text[0] == 'i') {
        ph += 1;
        text.remove_prefix(1);
    }
    PauliString p(text.size());
    for (size_t q = 0; q < text.size(); q++) p.set(q, text[q]);
    p.phase = u8((p.phase + ph) & 3);
    return p;
}

}  // namespace cultiv
