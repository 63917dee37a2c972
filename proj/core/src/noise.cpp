#include "cultivator/noise.hpp"

#include <algorithm>
#include <map>

namespace cultiv {

NoiseModel NoiseModel::from_name(std::string_view name, double p) {
    if (name == "sd6" || name == "SD6") return sd6(p);
    if (name == "pm" || name == "PM") return pm(p);
    fail("unknown noise model '" + std::string(name) + "'");
}

namespace {

// CX c t  ->  H t, CZ c t, H t      (same tick layer)
// CY c t  ->  S_DAG t, H t, CZ c t, H t, S t
Circuit rewrite_for_pm(const Circuit &in) {
    Circuit out;
    out.n_qubits = in.n_qubits;
    for (const auto &ins : in.instructions) {
        if (ins.op != Op::CX && ins.op != Op::CY) {
            out.instructions.push_back(ins);
            continue;
        }
        for (size_t i = 0; i < ins.targets.size(); i += 2) {
            u32 c = ins.targets[i].value, t = ins.targets[i + 1].value;
            if (ins.op == Op::CY) out.append(Op::S_DAG, {t});
            out.append(Op::H, {t});
            Instruction cz{Op::CZ, {Target::qubit(c), Target::qubit(t)}, 0, "", ins.nonlocal, -1};
            out.append(cz);
            out.append(Op::H, {t});
            if (ins.op == Op::CY) out.append(Op::S, {t});
        }
    }
    return out;
}

}  // namespace

Circuit apply_noise(const Circuit &ideal, const NoiseModel &m, std::string_view exempt_prefix) {
    require(!ideal.has_noise(), "apply_noise: circuit already contains noise channels");
    Circuit src = m.kind == NoiseModel::PM ? rewrite_for_pm(ideal) : ideal;
    double p = m.p;
    auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };

    // alive interval per qubit over non-exempt tick layers
    std::vector<long> first_touch(src.n_qubits, -1), last_touch(src.n_qubits, -1);
    {
        size_t layer = 0;
        std::string stage;
        for (const auto &ins : src.instructions) {
            if (ins.op == Op::TICK) { layer++; continue; }
            if (ins.op == Op::STAGE) { stage = ins.label; continue; }
            if (ins.is_annotation()) continue;
            if (stage.rfind(exempt_prefix, 0) == 0) continue;
            for (const Target &t : ins.targets)
                if (t.kind == Target::Qubit) {
                    if (first_touch[t.value] < 0) first_touch[t.value] = long(layer);
                    last_touch[t.value] = long(layer);
                }
        }
    }

    Circuit out;
    out.n_qubits = src.n_qubits;
    size_t layer = 0;
    std::string stage;
    std::vector<bool> touched(src.n_qubits, false);

    auto flush_idle = [&]() {
        if (m.kind != NoiseModel::SD6 || p <= 0) return;
        Instruction idle{Op::DEPOLARIZE1, {}, clamp01(p), "", false, -1};
        for (u32 q = 0; q < src.n_qubits; q++)
            if (!touched[q] && first_touch[q] >= 0 && long(layer) > first_touch[q] &&
                long(layer) < last_touch[q])
                idle.targets.push_back(Target::qubit(q));
        if (!idle.targets.empty()) out.instructions.push_back(idle);
        std::fill(touched.begin(), touched.end(), false);
    };

    for (const auto &ins : src.instructions) {
        if (ins.op == Op::TICK) {
            flush_idle();
            layer++;
            out.instructions.push_back(ins);
            continue;
        }
        if (ins.op == Op::STAGE) stage = ins.label;
        bool exempt = stage.rfind(exempt_prefix, 0) == 0;
        const OpInfo &info = op_info(ins.op);

        if (!exempt && ins.op == Op::M && p > 0) {
            Instruction e{Op::X_ERROR, ins.targets, clamp01(p), "", false, -1};
            out.instructions.push_back(e);
        }
        out.instructions.push_back(ins);
        if (!ins.is_annotation())
            for (const Target &t : ins.targets)
                if (t.kind == Target::Qubit) touched[t.value] = true;
        if (exempt || p <= 0) continue;

        if (ins.op == Op::R) {
            Instruction e{Op::X_ERROR, ins.targets, clamp01(p), "", false, -1};
            out.instructions.push_back(e);
        } else if (info.is_gate) {
            double rate;
            Op chan;
            if (info.arity == 1) {
                rate = m.kind == NoiseModel::PM ? p / 10 : p;
                chan = Op::DEPOLARIZE1;
            } else if (info.arity == 2) {
                rate = m.kind == NoiseModel::PM ? (ins.nonlocal ? 5 * p : p) : p;
                chan = Op::DEPOLARIZE2;
            } else {
                rate = m.kind == NoiseModel::PM ? 5 * p : p;
                chan = Op::DEPOLARIZE3;
            }
            Instruction e{chan, ins.targets, clamp01(rate), "", false, -1};
            out.instructions.push_back(e);
        }
    }
    flush_idle();
    return out;
}

}  // namespace cultiv
