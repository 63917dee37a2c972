#include "cultivator/tableau.hpp"

namespace cultiv {

namespace {

struct QubitBits {
    bool x, z;
};

inline QubitBits bits_of(const PauliString &p, size_t q) { return {p.x(q), p.z(q)}; }

inline void add_phase(PauliString &p, int k) { p.phase = u8((p.phase + k) & 3); }

void conj_single(PauliString &p, Op op, size_t q) {
    auto [x, z] = bits_of(p, q);
    switch (op) {
        case Op::H:
            p.set_x(q, z); p.set_z(q, x);
            if (x && z) add_phase(p, 2);
            break;
        case Op::S:
            if (x) { p.set_z(q, !z); add_phase(p, 1); }
            break;
        case Op::S_DAG:
            if (x) { p.set_z(q, !z); add_phase(p, 3); }
            break;
        case Op::X:
            if (z) add_phase(p, 2);
            break;
        case Op::Y:
            if (x != z) add_phase(p, 2);
            break;
        case Op::Z:
            if (x) add_phase(p, 2);
            break;
        case Op::SQRT_X:
            if (z) { p.set_x(q, !x); add_phase(p, 3); }
            break;
        case Op::SQRT_X_DAG:
            if (z) { p.set_x(q, !x); add_phase(p, 1); }
            break;
        case Op::H_XY:
            if (x) { p.set_z(q, !z); add_phase(p, 1); }
            if (z) add_phase(p, 2);
            break;
        default:
            fail("conjugate_by_gate: not a single-qubit Clifford");
    }
}

}  // namespace

void conjugate_by_gate(PauliString &p, Op op, const u32 *t) {
    switch (op) {
        case Op::H: case Op::S: case Op::S_DAG: case Op::X: case Op::Y: case Op::Z:
        case Op::SQRT_X: case Op::SQRT_X_DAG: case Op::H_XY:
            conj_single(p, op, t[0]);
            return;
        case Op::CX: {
            size_t c = t[0], tt = t[1];
            auto [xc, zc] = bits_of(p, c);
            auto [xt, zt] = bits_of(p, tt);
            p.set_x(tt, xt ^ xc);
            p.set_z(c, zc ^ zt);
            return;
        }
        case Op::CZ: {
            size_t c = t[0], tt = t[1];
            auto [xc, zc] = bits_of(p, c);
            auto [xt, zt] = bits_of(p, tt);
            p.set_z(tt, zt ^ xc);
            p.set_z(c, zc ^ xt);
            if (xc && xt) add_phase(p, 2);
            return;
        }
        case Op::CY: {
            u32 tq[2] = {t[0], t[1]};
            conj_single(p, Op::S_DAG, tq[1]);
            conjugate_by_gate(p, Op::CX, tq);
            conj_single(p, Op::S, tq[1]);
            return;
        }
        case Op::SWAP: {
            size_t a = t[0], b = t[1];
            auto [xa, za] = bits_of(p, a);
            auto [xb, zb] = bits_of(p, b);
            p.set_x(a, xb); p.set_z(a, zb);
            p.set_x(b, xa); p.set_z(b, za);
            return;
        }
        default:
            fail("conjugate_by_gate: gate is not Clifford");
    }
}

CliffordTableau CliffordTableau::identity(size_t n) {
    CliffordTableau t;
    t.n = n;
    t.x_images.reserve(n);
    t.z_images.reserve(n);
    for (size_t q = 0; q < n; q++) {
        t.x_images.push_back(PauliString::single(n, q, 'X'));
        t.z_images.push_back(PauliString::single(n, q, 'Z'));
    }
    return t;
}

void CliffordTableau::append(Op op, const u32 *targets) {
    for (auto &p : x_images) conjugate_by_gate(p, op, targets);
    for (auto &p : z_images) conjugate_by_gate(p, op, targets);
}

PauliString CliffordTableau::conjugate(const PauliString &p) const {
    require(p.n == n, "tableau/Pauli size mismatch");
    PauliString out = PauliString::identity(n);
    out.phase = p.phase;
    for (size_t q = 0; q < n; q++)
        if (p.x(q)) out *= x_images[q];
    for (size_t q = 0; q < n; q++)
        if (p.z(q)) out *= z_images[q];
    return out;
}

CliffordTableau CliffordTableau::then(const CliffordTableau &second) const {
    require(n == second.n, "tableau size mismatch");
    CliffordTableau out;
    out.n = n;
    out.x_images.reserve(n);
    out.z_images.reserve(n);
    for (size_t q = 0; q < n; q++) {
        out.x_images.push_back(second.conjugate(x_images[q]));
        out.z_images.push_back(second.conjugate(z_images[q]));
    }
    return out;
}

CliffordTableau CliffordTableau::inverse() const {
    // Solve for the inverse bit-map by Gaussian elimination on the 2n x 2n
    // symplectic matrix, then patch signs against the forward map.
    size_t m = 2 * n;
    size_t words = word_count(m);
    std::vector<std::vector<u64>> rows(m, std::vector<u64>(words));
    std::vector<std::vector<u64>> id(m, std::vector<u64>(words));
    auto encode = [&](const PauliString &p, std::vector<u64> &row) {
        for (size_t q = 0; q < n; q++) {
            if (p.x(q)) set_bit(row, q, true);
            if (p.z(q)) set_bit(row, n + q, true);
        }
    };
    for (size_t q = 0; q < n; q++) encode(x_images[q], rows[q]);
    for (size_t q = 0; q < n; q++) encode(z_images[q], rows[n + q]);
    for (size_t i = 0; i < m; i++) set_bit(id[i], i, true);

    // invert: [rows | id] -> [id | rows^-1]
    for (size_t col = 0; col < m; col++) {
        size_t piv = col;
        while (piv < m && !get_bit(rows[piv], col)) piv++;
        require(piv < m, "tableau not invertible (invalid tableau)");
        std::swap(rows[piv], rows[col]);
        std::swap(id[piv], id[col]);
        for (size_t r = 0; r < m; r++) {
            if (r != col && get_bit(rows[r], col)) {
                xor_into(rows[r], rows[col]);
                xor_into(id[r], id[col]);
            }
        }
    }

    CliffordTableau inv;
    inv.n = n;
    inv.x_images.assign(n, PauliString(n));
    inv.z_images.assign(n, PauliString(n));
    auto decode = [&](const std::vector<u64> &row) {
        PauliString p(n);
        for (size_t q = 0; q < n; q++) {
            if (get_bit(row, q)) p.set_x(q, true);
            if (get_bit(row, n + q)) p.set_z(q, true);
        }
        return p;
    };
    // Column q of the inverse bit-map is the preimage of X_q / Z_q. The
    // Gaussian elimination above produced exactly the inverse matrix in `id`,
    // whose row r gives the expansion of basis vector r in image coordinates.
    for (size_t q = 0; q < n; q++) {
        inv.x_images[q] = decode(id[q]);
        inv.z_images[q] = decode(id[n + q]);
    }
    // Fix phases so that conjugating the inverse images forward gives back
    // exactly +X_q / +Z_q.
    for (size_t q = 0; q < n; q++) {
        PauliString fx = conjugate(inv.x_images[q]);
        add_phase(inv.x_images[q], 4 - fx.phase);
        PauliString fz = conjugate(inv.z_images[q]);
        add_phase(inv.z_images[q], 4 - fz.phase);
    }
    return inv;
}

bool CliffordTableau::is_valid() const {
    for (size_t i = 0; i < n; i++) {
        if (x_images[i].display_phase() % 2 || z_images[i].display_phase() % 2) return false;
        if (x_images[i].commutes_with(z_images[i])) return false;
        for (size_t j = i + 1; j < n; j++) {
            if (!x_images[i].commutes_with(x_images[j])) return false;
            if (!z_images[i].commutes_with(z_images[j])) return false;
            if (!x_images[i].commutes_with(z_images[j])) return false;
            if (!z_images[i].commutes_with(x_images[j])) return false;
        }
    }
    return true;
}

bool CliffordTableau::is_identity() const {
    for (size_t q = 0; q < n; q++) {
        if (!(x_images[q] == PauliString::single(n, q, 'X'))) return false;
        if (!(z_images[q] == PauliString::single(n, q, 'Z'))) return false;
    }
    return true;
}

bool in_group_mod_phase(const PauliString &p, const std::vector<PauliString> &gens,
                        int *phase_out) {
    if (gens.empty()) {
        if (p.is_identity_up_to_phase()) {
            if (phase_out) *phase_out = p.display_phase();
            return true;
        }
        return false;
    }
    size_t n = p.n;
    size_t m = 2 * n;
    size_t words = word_count(m);
    auto encode = [&](const PauliString &q) {
        std::vector<u64> row(words);
        for (size_t i = 0; i < n; i++) {
            if (q.x(i)) set_bit(row, i, true);
            if (q.z(i)) set_bit(row, n + i, true);
        }
        return row;
    };
    std::vector<std::vector<u64>> rows;
    std::vector<std::vector<u64>> picks;  // which gens were combined into each row
    size_t g = gens.size();
    size_t gwords = word_count(g);
    for (size_t i = 0; i < g; i++) {
        rows.push_back(encode(gens[i]));
        picks.emplace_back(gwords);
        set_bit(picks.back(), i, true);
    }
    std::vector<u64> target = encode(p);
    std::vector<u64> chosen(gwords);
    size_t rank_row = 0;
    for (size_t col = 0; col < m && rank_row < rows.size(); col++) {
        size_t piv = rank_row;
        while (piv < rows.size() && !get_bit(rows[piv], col)) piv++;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank_row]);
        std::swap(picks[piv], picks[rank_row]);
        for (size_t r = 0; r < rows.size(); r++) {
            if (r != rank_row && get_bit(rows[r], col)) {
                xor_into(rows[r], rows[rank_row]);
                xor_into(picks[r], picks[rank_row]);
            }
        }
        if (get_bit(target, col)) {
            xor_into(target, rows[rank_row]);
            xor_into(chosen, picks[rank_row]);
        }
        rank_row++;
    }
    if (any_word(target)) return false;
    if (phase_out) {
        PauliString prod = PauliString::identity(n);
        for (size_t i = 0; i < g; i++)
            if (get_bit(chosen, i)) prod *= gens[i];
        *phase_out = int((p.display_phase() + 4 - prod.display_phase()) & 3);
    }
    return true;
}

}  // namespace cultiv
