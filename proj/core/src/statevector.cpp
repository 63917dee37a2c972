#include "cultivator/statevector.hpp"

#include <cmath>

namespace cultiv {

namespace {
const double kSqrtHalf = 1.0 / std::sqrt(2.0);
const cplx kI(0, 1);
}  // namespace

int StateVector::ensure(u32 q) {
    auto it = slot.find(q);
    if (it != slot.end()) return it->second;
    require(live() < cap, "statevector qubit cap exceeded");
    int b = int(live());
    slot[q] = b;
    amps.resize(amps.size() * 2, cplx(0));
    return b;
}

void StateVector::apply1(u32 q, const cplx m[2][2]) {
    int b = ensure(q);
    size_t stride = size_t(1) << b;
    for (size_t base = 0; base < amps.size(); base += 2 * stride)
        for (size_t i = base; i < base + stride; i++) {
            cplx a0 = amps[i], a1 = amps[i + stride];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
}

void StateVector::apply_cphase(const std::vector<u32> &qs, cplx phase) {
    u64 mask = 0;
    for (u32 q : qs) mask |= u64(1) << ensure(q);
    for (size_t i = 0; i < amps.size(); i++)
        if ((i & mask) == mask) amps[i] *= phase;
}

void StateVector::apply2(u32 a, u32 b, const cplx m[4][4]) {
    int ba = ensure(a), bb = ensure(b);
    u64 ma = u64(1) << ba, mb = u64(1) << bb;
    for (size_t i = 0; i < amps.size(); i++) {
        if (i & (ma | mb)) continue;
        size_t idx[4] = {i, i | mb, i | ma, i | ma | mb};  // basis order |ab>
        cplx v[4];
        for (int k = 0; k < 4; k++) v[k] = amps[idx[k]];
        for (int r = 0; r < 4; r++) {
            cplx acc = 0;
            for (int k = 0; k < 4; k++) acc += m[r][k] * v[k];
            amps[idx[r]] = acc;
        }
    }
}

void StateVector::apply_pauli(const PauliString &p, const std::vector<u32> &qubits) {
    for (size_t i = 0; i < qubits.size(); i++) {
        char l = p.letter(i);
        if (l == 'I') continue;
        u32 q = qubits[i];
        static const cplx X[2][2] = {{0, 1}, {1, 0}};
        static const cplx Y[2][2] = {{0, -kI}, {kI, 0}};
        static const cplx Z[2][2] = {{1, 0}, {0, -1}};
        apply1(q, l == 'X' ? X : l == 'Y' ? Y : Z);
    }
}

void StateVector::apply_gate(Op op, const u32 *t) {
    const cplx r = kSqrtHalf;
    const cplx t8 = std::polar(1.0, M_PI / 4);  // e^{i pi/4}
    switch (op) {
        case Op::H: {
            const cplx m[2][2] = {{r, r}, {r, -r}};
            apply1(t[0], m);
            return;
        }
        case Op::S: apply_cphase({t[0]}, kI); return;
        case Op::S_DAG: apply_cphase({t[0]}, -kI); return;
        case Op::T: apply_cphase({t[0]}, t8); return;
        case Op::T_DAG: apply_cphase({t[0]}, std::conj(t8)); return;
        case Op::X: {
            const cplx m[2][2] = {{0, 1}, {1, 0}};
            apply1(t[0], m);
            return;
        }
        case Op::Y: {
            const cplx m[2][2] = {{0, -kI}, {kI, 0}};
            apply1(t[0], m);
            return;
        }
        case Op::Z: apply_cphase({t[0]}, -1); return;
        case Op::SQRT_X: {
            const cplx m[2][2] = {{(1.0 + kI) / 2.0, (1.0 - kI) / 2.0},
                                  {(1.0 - kI) / 2.0, (1.0 + kI) / 2.0}};
            apply1(t[0], m);
            return;
        }
        case Op::SQRT_X_DAG: {
            const cplx m[2][2] = {{(1.0 - kI) / 2.0, (1.0 + kI) / 2.0},
                                  {(1.0 + kI) / 2.0, (1.0 - kI) / 2.0}};
            apply1(t[0], m);
            return;
        }
        case Op::H_XY: {
            // (X + Y)/sqrt(2)
            const cplx m[2][2] = {{0, r * (1.0 - kI)}, {r * (1.0 + kI), 0}};
            apply1(t[0], m);
            return;
        }
        case Op::G_X: {
            // G_X = T H
            const cplx m[2][2] = {{r, r}, {t8 * r, -t8 * r}};
            apply1(t[0], m);
            return;
        }
        case Op::G_X_DAG: {
            const cplx m[2][2] = {{r, std::conj(t8) * r}, {r, -std::conj(t8) * r}};
            apply1(t[0], m);
            return;
        }
        case Op::G_Y: {
            // G_Y = T S H
            const cplx m[2][2] = {{r, r}, {t8 * kI * r, -t8 * kI * r}};
            apply1(t[0], m);
            return;
        }
        case Op::G_Y_DAG: {
            const cplx m[2][2] = {{r, std::conj(t8 * kI) * r}, {r, -std::conj(t8 * kI) * r}};
            apply1(t[0], m);
            return;
        }
        case Op::CX: {
            cplx m[4][4] = {};
            m[0][0] = m[1][1] = 1; m[2][3] = m[3][2] = 1;
            apply2(t[0], t[1], m);
            return;
        }
        case Op::CY: {
            cplx m[4][4] = {};
            m[0][0] = m[1][1] = 1; m[2][3] = -kI; m[3][2] = kI;
            apply2(t[0], t[1], m);
            return;
        }
        case Op::CZ: apply_cphase({t[0], t[1]}, -1); return;
        case Op::CCZ: apply_cphase({t[0], t[1], t[2]}, -1); return;
        case Op::SWAP: {
            cplx m[4][4] = {};
            m[0][0] = m[3][3] = 1; m[1][2] = m[2][1] = 1;
            apply2(t[0], t[1], m);
            return;
        }
        case Op::CSX: {
            // controlled-(S X): |1><1| (x) [[0,1],[i,0]]
            cplx m[4][4] = {};
            m[0][0] = m[1][1] = 1; m[2][3] = 1; m[3][2] = kI;
            apply2(t[0], t[1], m);
            return;
        }
        case Op::CSX_DAG: {
            // controlled-(S_DAG X): |1><1| (x) [[0,1],[-i,0]]
            cplx m[4][4] = {};
            m[0][0] = m[1][1] = 1; m[2][3] = 1; m[3][2] = -kI;
            apply2(t[0], t[1], m);
            return;
        }
        default:
            fail("statevector: unsupported gate");
    }
}

double StateVector::prob_one(u32 q) const {
    auto it = slot.find(q);
    if (it == slot.end()) return 0.0;  // unallocated qubit is |0>
    u64 m = u64(1) << it->second;
    double p = 0;
    for (size_t i = 0; i < amps.size(); i++)
        if (i & m) p += std::norm(amps[i]);
    return p;
}

bool StateVector::measure_z(u32 q, Rng &rng, int forced) {
    ensure(q);
    double p1 = prob_one(q);
    bool outcome;
    if (forced >= 0) {
        outcome = forced != 0;
        double pb = outcome ? p1 : 1 - p1;
        require(pb > 1e-12, "forced measurement branch has zero probability");
    } else {
        outcome = rng.uniform() < p1;
    }
    u64 m = u64(1) << slot.at(q);
    for (size_t i = 0; i < amps.size(); i++)
        if (bool(i & m) != outcome) amps[i] = 0;
    normalize();
    return outcome;
}

void StateVector::reset_z(u32 q, Rng &rng) {
    if (!slot.count(q)) { ensure(q); return; }
    bool out = measure_z(q, rng);
    if (out) {
        const cplx m[2][2] = {{0, 1}, {1, 0}};
        apply1(q, m);
    }
}

void StateVector::drop(u32 q) {
    auto it = slot.find(q);
    require(it != slot.end(), "drop: qubit not allocated");
    int b = it->second;
    u64 m = u64(1) << b;
    // determine the classical branch
    double p1 = prob_one(q);
    bool keep_one = p1 > 0.5;
    require(keep_one ? p1 > 1 - 1e-9 : p1 < 1e-9, "drop: qubit still entangled");
    std::vector<cplx> out(amps.size() / 2);
    for (size_t i = 0; i < amps.size(); i++) {
        if (bool(i & m) != keep_one) continue;
        size_t low = i & (m - 1);
        size_t high = (i >> (b + 1)) << b;
        out[high | low] = amps[i];
    }
    amps = std::move(out);
    slot.erase(it);
    for (auto &kv : slot)
        if (kv.second > b) kv.second--;
    normalize();
}

double StateVector::norm() const {
    double s = 0;
    for (const auto &a : amps) s += std::norm(a);
    return std::sqrt(s);
}

void StateVector::normalize() {
    double n = norm();
    require(n > 1e-12, "state collapsed to zero norm");
    for (auto &a : amps) a /= n;
}

cplx StateVector::inner(const StateVector &other) const {
    require(amps.size() == other.amps.size(), "inner: dimension mismatch");
    cplx s = 0;
    for (size_t i = 0; i < amps.size(); i++) s += std::conj(other.amps[i]) * amps[i];
    return s;
}

SvRunResult sv_run(const Circuit &c, u64 seed, bool force_trivial, size_t qubit_cap) {
    SvRunResult res;
    res.state.cap = qubit_cap;
    Rng rng(seed, 0x57a7e);
    StateVector &sv = res.state;
    for (const auto &ins : c.instructions) {
        const OpInfo &info = op_info(ins.op);
        switch (ins.op) {
            case Op::TICK: case Op::STAGE: case Op::DETECTOR:
            case Op::OBSERVABLE_INCLUDE: case Op::LOGICAL_FRAME:
                break;
            case Op::M:
                for (const Target &t : ins.targets) {
                    int forced = -1;
                    if (force_trivial) forced = sv.prob_one(t.value) > 1 - 1e-12 ? 1 : 0;
                    res.record.push_back(sv.measure_z(t.value, rng, forced));
                }
                break;
            case Op::R:
                for (const Target &t : ins.targets) sv.reset_z(t.value, rng);
                break;
            case Op::POSTSELECT: {
                bool bit = size_t(ins.param) & 1;
                for (const Target &t : ins.targets) bit ^= res.record[res.record.size() - t.value];
                if (bit) {
                    res.kept = false;
                    res.discard_stage = ins.label;
                    return res;
                }
                break;
            }
            case Op::X_ERROR:
                for (const Target &t : ins.targets)
                    if (rng.bernoulli(ins.param)) {
                        const cplx m[2][2] = {{0, 1}, {1, 0}};
                        sv.apply1(t.value, m);
                    }
                break;
            case Op::DEPOLARIZE1:
            case Op::DEPOLARIZE2:
            case Op::DEPOLARIZE3: {
                int arity = info.arity;
                for (size_t i = 0; i < ins.targets.size(); i += size_t(arity))
                    if (rng.bernoulli(ins.param)) {
                        u64 r = 1 + rng.below((u64(1) << (2 * arity)) - 1);
                        for (int k = 0; k < arity; k++) {
                            u64 pp = (r >> (2 * k)) & 3;  // 1=X, 2=Z, 3=Y
                            if (!pp) continue;
                            PauliString p(1);
                            p.set(0, pp == 1 ? 'X' : pp == 2 ? 'Z' : 'Y');
                            sv.apply_pauli(p, {ins.targets[i + size_t(k)].value});
                        }
                    }
                break;
            }
            default: {
                require(info.is_gate, "sv_run: unhandled instruction");
                std::vector<u32> qs(ins.targets.size());
                for (size_t i = 0; i < qs.size(); i++) qs[i] = ins.targets[i].value;
                for (size_t i = 0; i < qs.size(); i += size_t(info.arity))
                    sv.apply_gate(ins.op, qs.data() + i);
            }
        }
    }
    return res;
}

}  // namespace cultiv
