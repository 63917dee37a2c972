#include "cultivator/dem.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cultivator/tableau.hpp"

namespace cultiv {

namespace {

// Sparse Pauli frame over qubit indices.
struct Frame {
    std::map<u32, std::pair<bool, bool>> f;  // qubit -> (x, z)

    bool x(u32 q) const { auto it = f.find(q); return it != f.end() && it->second.first; }
    bool z(u32 q) const { auto it = f.find(q); return it != f.end() && it->second.second; }
    void set(u32 q, bool xv, bool zv) {
        if (!xv && !zv) f.erase(q);
        else f[q] = {xv, zv};
    }
    void flip(u32 q, bool xv, bool zv) {
        auto [cx, cz] = f.count(q) ? f[q] : std::pair<bool, bool>{false, false};
        set(q, cx ^ xv, cz ^ zv);
    }
};

void propagate(Frame &fr, Op op, const Target *t) {
    auto get = [&](u32 q) {
        return fr.f.count(q) ? fr.f[q] : std::pair<bool, bool>{false, false};
    };
    switch (op) {
        case Op::H: {
            auto [x, z] = get(t[0].value);
            fr.set(t[0].value, z, x);
            break;
        }
        case Op::S: case Op::S_DAG: case Op::H_XY: {
            auto [x, z] = get(t[0].value);
            fr.set(t[0].value, x, z ^ x);
            break;
        }
        case Op::SQRT_X: case Op::SQRT_X_DAG: {
            auto [x, z] = get(t[0].value);
            fr.set(t[0].value, x ^ z, z);
            break;
        }
        case Op::X: case Op::Y: case Op::Z:
            break;
        case Op::CX: {
            auto [xa, za] = get(t[0].value);
            auto [xb, zb] = get(t[1].value);
            fr.set(t[1].value, xb ^ xa, zb);
            fr.set(t[0].value, xa, za ^ zb);
            break;
        }
        case Op::CZ: {
            auto [xa, za] = get(t[0].value);
            auto [xb, zb] = get(t[1].value);
            fr.set(t[1].value, xb, zb ^ xa);
            fr.set(t[0].value, xa, za ^ xb);
            break;
        }
        case Op::CY: {
            auto [xb0, zb0] = get(t[1].value);
            fr.set(t[1].value, xb0, zb0 ^ xb0);  // S_DAG on target
            auto [xa, za] = get(t[0].value);
            auto [xb, zb] = get(t[1].value);
            fr.set(t[1].value, xb ^ xa, zb);
            fr.set(t[0].value, xa, za ^ (zb));
            auto [xb2, zb2] = get(t[1].value);
            fr.set(t[1].value, xb2, zb2 ^ xb2);  // S on target
            break;
        }
        case Op::SWAP: {
            auto a = get(t[0].value), b = get(t[1].value);
            fr.set(t[0].value, b.first, b.second);
            fr.set(t[1].value, a.first, a.second);
            break;
        }
        default:
            fail("error propagation through non-Clifford gate " +
                 std::string(op_info(op).name));
    }
}

}  // namespace

DetectorErrorModel extract_dem(const Circuit &noisy) {
    DetectorErrorModel dem;
    // index measurement record -> (detectors, marks, observables) it feeds
    size_t n_meas = noisy.num_measurements();
    std::vector<std::vector<u32>> rec_to_node(n_meas);
    std::vector<std::vector<u32>> rec_to_obs(n_meas);

    struct FrameObsPoint { size_t instr; u32 obs; std::vector<Target> paulis; };
    std::vector<FrameObsPoint> frame_points;

    size_t meas = 0;
    u32 n_det = 0, n_mark = 0;
    for (size_t i = 0; i < noisy.instructions.size(); i++) {
        const auto &ins = noisy.instructions[i];
        if (ins.op == Op::M) meas += ins.targets.size();
        else if (ins.op == Op::DETECTOR) {
            for (const Target &t : ins.targets) rec_to_node[meas - t.value].push_back(n_det);
            n_det++;
        }
    }
    dem.n_detectors = n_det;
    meas = 0;
    for (size_t i = 0; i < noisy.instructions.size(); i++) {
        const auto &ins = noisy.instructions[i];
        if (ins.op == Op::M) meas += ins.targets.size();
        else if (ins.op == Op::POSTSELECT) {
            for (const Target &t : ins.targets)
                rec_to_node[meas - t.value].push_back(n_det + n_mark);
            n_mark++;
        } else if (ins.op == Op::OBSERVABLE_INCLUDE) {
            for (const Target &t : ins.targets)
                rec_to_obs[meas - t.value].push_back(u32(ins.param));
            dem.n_observables = std::max(dem.n_observables, size_t(ins.param) + 1);
        } else if (ins.op == Op::LOGICAL_FRAME) {
            frame_points.push_back({i, u32(ins.param), ins.targets});
            dem.n_observables = std::max(dem.n_observables, size_t(ins.param) + 1);
        }
    }
    dem.n_marks = n_mark;

    // Walk each noise channel; propagate each Pauli component forward.
    std::map<std::pair<std::vector<u32>, u32>, double> merged;

    std::vector<size_t> meas_before(noisy.instructions.size() + 1, 0);
    for (size_t i = 0; i < noisy.instructions.size(); i++)
        meas_before[i + 1] = meas_before[i] +
            (noisy.instructions[i].op == Op::M ? noisy.instructions[i].targets.size() : 0);

    auto run_component = [&](size_t start_instr, Frame fr, double p) {
        std::set<u32> nodes;
        u32 obs = 0;
        size_t meas_seen = meas_before[start_instr + 1];
        for (size_t i = start_instr + 1; i < noisy.instructions.size(); i++) {
            const auto &ins = noisy.instructions[i];
            const OpInfo &info = op_info(ins.op);
            if (ins.op == Op::M) {
                for (const Target &t : ins.targets) {
                    if (fr.x(t.value)) {
                        for (u32 nd : rec_to_node[meas_seen])
                            if (nodes.count(nd)) nodes.erase(nd);
                            else nodes.insert(nd);
                        for (u32 ob : rec_to_obs[meas_seen]) obs ^= u32(1) << ob;
                    }
                    meas_seen++;
                }
            } else if (ins.op == Op::R) {
                for (const Target &t : ins.targets) fr.set(t.value, false, false);
            } else if (ins.op == Op::LOGICAL_FRAME) {
                bool flip = false;
                for (const Target &t : ins.targets) {
                    if (t.kind == Target::PauliX) flip ^= fr.z(t.value);
                    else if (t.kind == Target::PauliZ) flip ^= fr.x(t.value);
                    else flip ^= fr.x(t.value) ^ fr.z(t.value);
                }
                if (flip) obs ^= u32(1) << u32(ins.param);
            } else if (info.is_gate) {
                for (size_t k = 0; k < ins.targets.size(); k += size_t(info.arity))
                    propagate(fr, ins.op, ins.targets.data() + k);
            }
        }
        if (nodes.empty() && obs == 0) return;
        std::vector<u32> key(nodes.begin(), nodes.end());
        double &q = merged[{key, obs}];
        q = q * (1 - p) + p * (1 - q);
    };

    for (size_t i = 0; i < noisy.instructions.size(); i++) {
        const auto &ins = noisy.instructions[i];
        int arity = 0;
        if (ins.op == Op::DEPOLARIZE1) arity = 1;
        else if (ins.op == Op::DEPOLARIZE2) arity = 2;
        else if (ins.op == Op::DEPOLARIZE3) arity = 3;
        else if (ins.op == Op::X_ERROR) arity = -1;
        else continue;
        if (ins.param <= 0) continue;

        if (arity == -1) {
            for (const Target &t : ins.targets) {
                Frame fr;
                fr.set(t.value, true, false);
                run_component(i, fr, ins.param);
            }
            continue;
        }
        size_t n_comp = (size_t(1) << (2 * arity)) - 1;
        double pc = ins.param / double(n_comp);
        for (size_t g = 0; g < ins.targets.size(); g += size_t(arity)) {
            for (size_t comp = 1; comp <= n_comp; comp++) {
                Frame fr;
                for (int k = 0; k < arity; k++) {
                    u64 pp = (comp >> (2 * k)) & 3;  // 1=X, 2=Z, 3=Y
                    if (pp) fr.set(ins.targets[g + size_t(k)].value, pp & 1, pp & 2);
                }
                run_component(i, fr, pc);
            }
        }
    }

    for (auto &[key, q] : merged) {
        if (q <= 0) continue;
        require(q < 0.5, "mechanism probability >= 1/2 (builder error)");
        dem.mechanisms.push_back({q, key.first, key.second});
    }
    std::sort(dem.mechanisms.begin(), dem.mechanisms.end());
    return dem;
}

DetectorErrorModel decompose_dem(const DetectorErrorModel &dem) {
    // signatures available as atoms
    auto is_atom = [](const std::vector<u32> &dets, u32 obs) {
        if (obs & 1) return dets.size() <= 1;
        return dets.size() <= 2;
    };
    std::set<std::pair<std::vector<u32>, u32>> atom_sigs;
    for (const auto &m : dem.mechanisms) {
        bool marked = false;
        for (u32 d : m.detectors)
            if (d >= dem.n_detectors) marked = true;
        if (!marked && is_atom(m.detectors, m.obs_mask))
            atom_sigs.insert({m.detectors, m.obs_mask});
    }
    // atoms indexed by first detector
    std::map<u32, std::vector<std::pair<std::vector<u32>, u32>>> by_det;
    for (const auto &sig : atom_sigs)
        for (u32 d : sig.first) by_det[d].push_back(sig);

    std::map<std::pair<std::vector<u32>, u32>, double> out_sigs;
    auto add = [&](const std::vector<u32> &dets, u32 obs, double p) {
        double &q = out_sigs[{dets, obs}];
        q = q * (1 - p) + p * (1 - q);
    };

    for (const auto &m : dem.mechanisms) {
        // mechanisms that trip a postselect mark never reach the decoder on a
        // kept shot; they stay in the raw model for the fault-distance search
        // but are dropped from the matching decomposition
        bool marked = false;
        for (u32 d : m.detectors)
            if (d >= dem.n_detectors) marked = true;
        if (marked) continue;
        if (is_atom(m.detectors, m.obs_mask)) {
            add(m.detectors, m.obs_mask, m.p);
            continue;
        }
        // partition m.detectors into atoms, obs assigned along the way
        std::vector<std::pair<std::vector<u32>, u32>> parts;
        std::set<u32> remaining(m.detectors.begin(), m.detectors.end());
        u32 obs_left = m.obs_mask;
        std::function<bool()> solve = [&]() -> bool {
            if (remaining.empty()) return obs_left == 0;
            u32 d = *remaining.begin();
            auto it = by_det.find(d);
            if (it == by_det.end()) return false;
            for (const auto &cand : it->second) {
                bool fits = true;
                for (u32 cd : cand.first)
                    if (!remaining.count(cd)) { fits = false; break; }
                if (!fits) continue;
                if ((cand.second & obs_left) != cand.second) continue;
                for (u32 cd : cand.first) remaining.erase(cd);
                obs_left ^= cand.second;
                parts.push_back(cand);
                if (solve()) return true;
                parts.pop_back();
                obs_left ^= cand.second;
                for (u32 cd : cand.first) remaining.insert(cd);
            }
            return false;
        };
        if (!solve()) {
            std::ostringstream msg;
            msg << "undecomposable hyperedge: dets {";
            for (u32 d : m.detectors) msg << ' ' << d;
            msg << " } obs " << m.obs_mask << " (builder bug)";
            fail(msg.str());
        }
        for (const auto &pt : parts) add(pt.first, pt.second, m.p);
    }

    DetectorErrorModel out;
    out.n_detectors = dem.n_detectors;
    out.n_marks = 0;
    out.n_observables = dem.n_observables;
    for (auto &[key, q] : out_sigs) out.mechanisms.push_back({q, key.first, key.second});
    std::sort(out.mechanisms.begin(), out.mechanisms.end());
    return out;
}

std::string dem_to_text(const DetectorErrorModel &dem) {
    std::ostringstream o;
    o << "# detectors " << dem.n_detectors << " marks " << dem.n_marks << " observables "
      << dem.n_observables << "\n";
    for (const auto &m : dem.mechanisms) {
        o << "error(" << m.p << ")";
        for (u32 d : m.detectors)
            o << (d < dem.n_detectors ? " D" : " P") << (d < dem.n_detectors ? d : d - u32(dem.n_detectors));
        for (u32 b = 0; b < 32; b++)
            if (m.obs_mask & (u32(1) << b)) o << " L" << b;
        o << "\n";
    }
    return o.str();
}

}  // namespace cultiv
