#include "cultivator/refsim.hpp"

namespace cultiv {

bool AffineBit::operator==(const AffineBit &o) const {
    if (constant != o.constant) return false;
    size_t m = std::max(vars.size(), o.vars.size());
    for (size_t i = 0; i < m; i++) {
        u64 a = i < vars.size() ? vars[i] : 0;
        u64 b = i < o.vars.size() ? o.vars[i] : 0;
        if (a != b) return false;
    }
    return true;
}

RefSim::RefSim(size_t n_qubits) : n(n_qubits) {
    rows.reserve(2 * n);
    for (size_t q = 0; q < n; q++) rows.push_back(PauliString::single(n, q, 'X'));
    for (size_t q = 0; q < n; q++) rows.push_back(PauliString::single(n, q, 'Z'));
    row_vars.assign(2 * n, {});
}

void RefSim::apply_gate(Op op, const u32 *targets) {
    for (auto &r : rows) conjugate_by_gate(r, op, targets);
}

namespace {

void vars_xor(std::vector<u64> &dst, const std::vector<u64> &src) {
    if (dst.size() < src.size()) dst.resize(src.size());
    for (size_t i = 0; i < src.size(); i++) dst[i] ^= src[i];
}

}  // namespace

AffineBit RefSim::measure_z(u32 q) {
    size_t pivot = 2 * n;
    for (size_t r = n; r < 2 * n; r++)
        if (rows[r].x(q)) { pivot = r; break; }

    AffineBit out;
    if (pivot < 2 * n) {
        // random outcome: fresh variable
        size_t v = n_vars++;
        for (size_t r = 0; r < 2 * n; r++) {
            if (r != pivot && rows[r].x(q)) {
                rows[r] *= rows[pivot];
                vars_xor(row_vars[r], row_vars[pivot]);
            }
        }
        rows[pivot - n] = rows[pivot];
        row_vars[pivot - n] = row_vars[pivot];
        rows[pivot] = PauliString::single(n, q, 'Z');
        row_vars[pivot].assign(word_count(v + 1), 0);
        set_bit(row_vars[pivot], v, true);
        out.vars.assign(word_count(v + 1), 0);
        set_bit(out.vars, v, true);
    } else {
        // deterministic: Z_q is a product of stabilizer rows selected by the
        // destabilizers that anticommute with it
        PauliString acc = PauliString::identity(n);
        std::vector<u64> vars;
        for (size_t r = 0; r < n; r++) {
            if (rows[r].x(q)) {
                acc *= rows[r + n];
                vars_xor(vars, row_vars[r + n]);
            }
        }
        int ph = acc.display_phase();
        require(ph == 0 || ph == 2, "deterministic measurement with non-real sign");
        out.constant = ph == 2;
        out.vars = std::move(vars);
    }
    record.push_back(out);
    return out;
}

void RefSim::reset_z(u32 q) {
    AffineBit m = measure_z(q);
    record.pop_back();  // resets do not enter the measurement record
    // conditional X^m on q: flips the sign of every row anticommuting with X_q
    for (size_t r = 0; r < 2 * n; r++) {
        if (rows[r].z(q)) {
            if (m.constant) rows[r].phase = u8((rows[r].phase + 2) & 3);
            vars_xor(row_vars[r], m.vars);
        }
    }
}

void RefSim::run(const Circuit &c) {
    require(n >= c.n_qubits, "RefSim too small for circuit");
    for (const auto &ins : c.instructions) {
        const OpInfo &info = op_info(ins.op);
        if (ins.op == Op::M) {
            for (const Target &t : ins.targets) measure_z(t.value);
        } else if (ins.op == Op::R) {
            for (const Target &t : ins.targets) reset_z(t.value);
        } else if (info.is_gate) {
            require(info.is_clifford, "RefSim: non-Clifford gate " + std::string(info.name));
            std::vector<u32> qs(ins.targets.size());
            for (size_t i = 0; i < qs.size(); i++) qs[i] = ins.targets[i].value;
            for (size_t i = 0; i < qs.size(); i += size_t(info.arity))
                apply_gate(ins.op, qs.data() + i);
        }
        // TICK, noise, annotations: no state change
    }
}

AffineBit RefSim::group_element_sign(const PauliString &p) const {
    // Reduce p against stabilizer rows using the destabilizer pairing.
    PauliString acc = PauliString::identity(n);
    AffineBit sign;
    for (size_t r = 0; r < n; r++) {
        bool anti = !rows[r].commutes_with(p);
        if (anti) {
            acc *= rows[r + n];
            AffineBit s;
            s.vars = row_vars[r + n];
            sign ^= s;
        }
    }
    // acc should equal p up to sign
    PauliString diff = acc * p;  // p^2 = I for Hermitian p
    require(diff.is_identity_up_to_phase(), "group_element_sign: not in stabilizer group");
    int ph = diff.display_phase();
    require(ph == 0 || ph == 2, "group_element_sign: complex phase");
    // diff = acc * p; if diff = -I then acc = -p^(-1) ... for Hermitian p,
    // p * p = I, so acc = (+/-) p with the minus recorded in ph.
    sign.constant ^= (ph == 2);
    return sign;
}

bool RefSim::stabilizes(const PauliString &p) const {
    PauliString acc = PauliString::identity(n);
    for (size_t r = 0; r < n; r++)
        if (!rows[r].commutes_with(p)) acc *= rows[r + n];
    PauliString diff = acc * p;
    return diff.is_identity_up_to_phase();
}

CliffordTableau tableau_run(const Circuit &c, size_t n_qubits) {
    auto t = CliffordTableau::identity(n_qubits);
    for (const auto &ins : c.instructions) {
        const OpInfo &info = op_info(ins.op);
        if (!info.is_gate) {
            require(ins.op != Op::M && ins.op != Op::R,
                    "tableau_run: circuit contains measurement or reset");
            continue;
        }
        require(info.is_clifford, "tableau_run: non-Clifford gate");
        std::vector<u32> qs(ins.targets.size());
        for (size_t i = 0; i < qs.size(); i++) qs[i] = ins.targets[i].value;
        for (size_t i = 0; i < qs.size(); i += size_t(info.arity))
            t.append(ins.op, qs.data() + i);
    }
    return t;
}

bool verify_logical_action(const Circuit &c, size_t n_qubits,
                           const std::vector<PauliString> &stab_out,
                           const std::vector<std::pair<PauliString, PauliString>> &maps) {
    CliffordTableau t = tableau_run(c, n_qubits);
    for (const auto &[in, expected] : maps) {
        PauliString img = t.conjugate(in);
        PauliString diff = img * expected;  // expected^dag = expected for Hermitian
        int ph = 0;
        if (!in_group_mod_phase(diff, stab_out, &ph)) return false;
        if (ph != 0) return false;  // sign must match exactly
    }
    return true;
}

WiringSolve solve_wiring(const std::vector<AffineBit> &record, const AffineBit &target,
                         const std::vector<u32> &candidates) {
    WiringSolve out;
    struct Row {
        std::vector<u64> vars;
        std::vector<u32> members;
    };
    auto bit_at = [](const std::vector<u64> &v, size_t i) {
        return i / 64 < v.size() && ((v[i / 64] >> (i % 64)) & 1);
    };
    auto leading = [](const std::vector<u64> &v) -> long {
        for (size_t i = v.size(); i-- > 0;)
            if (v[i]) return long(i * 64 + 63 - size_t(__builtin_clzll(v[i])));
        return -1;
    };

    std::vector<Row> basis;  // kept sorted by leading bit, descending
    auto reduce = [&](Row &r) {
        for (auto &b : basis) {
            long lb = leading(b.vars);
            if (bit_at(r.vars, size_t(lb))) {
                vars_xor(r.vars, b.vars);
                for (u32 m : b.members) r.members.push_back(m);
            }
        }
    };
    for (u32 idx : candidates) {
        Row r{record[idx].vars, {idx}};
        reduce(r);
        long l = leading(r.vars);
        if (l < 0) continue;
        auto pos = basis.begin();
        while (pos != basis.end() && leading(pos->vars) > l) ++pos;
        basis.insert(pos, std::move(r));
    }
    Row cur{target.vars, {}};
    reduce(cur);
    if (leading(cur.vars) >= 0) return out;  // unsolvable

    out.ok = true;
    bool c = target.constant;
    std::sort(cur.members.begin(), cur.members.end());
    for (size_t i = 0; i < cur.members.size();) {
        size_t j = i;
        while (j < cur.members.size() && cur.members[j] == cur.members[i]) j++;
        if ((j - i) % 2) {
            out.records.push_back(cur.members[i]);
            c ^= record[cur.members[i]].constant;
        }
        i = j;
    }
    out.constant = c;
    return out;
}

}  // namespace cultiv
