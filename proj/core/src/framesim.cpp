#include "cultivator/framesim.hpp"

#include <algorithm>

namespace cultiv {

FrameSampler::FrameSampler(const Circuit &noisy_circuit) {
    n_qubits = noisy_circuit.n_qubits;
    size_t meas = 0;
    std::vector<std::string> stage_of_mark;
    for (const auto &ins : noisy_circuit.instructions) {
        const OpInfo &info = op_info(ins.op);
        switch (ins.op) {
            case Op::TICK:
            case Op::STAGE:
                break;
            case Op::M:
                for (const Target &t : ins.targets)
                    steps_.push_back({Op::M, t.value, 0, 0, 0, u32(meas++)});
                break;
            case Op::R:
                for (const Target &t : ins.targets) steps_.push_back({Op::R, t.value});
                break;
            case Op::DEPOLARIZE1:
            case Op::X_ERROR:
                for (const Target &t : ins.targets)
                    steps_.push_back({ins.op, t.value, 0, 0, ins.param});
                break;
            case Op::DEPOLARIZE2:
                for (size_t i = 0; i < ins.targets.size(); i += 2)
                    steps_.push_back({ins.op, ins.targets[i].value, ins.targets[i + 1].value,
                                      0, ins.param});
                break;
            case Op::DEPOLARIZE3:
                for (size_t i = 0; i < ins.targets.size(); i += 3)
                    steps_.push_back({ins.op, ins.targets[i].value, ins.targets[i + 1].value,
                                      ins.targets[i + 2].value, ins.param});
                break;
            case Op::DETECTOR: {
                Combo d{u32(detectors_.size()), {}};
                for (const Target &t : ins.targets) d.recs.push_back(u32(meas - t.value));
                detectors_.push_back(std::move(d));
                break;
            }
            case Op::POSTSELECT: {
                u32 sid = 0;
                auto it = std::find(stages.begin(), stages.end(), ins.label);
                if (it == stages.end()) {
                    sid = u32(stages.size());
                    stages.push_back(ins.label);
                } else {
                    sid = u32(it - stages.begin());
                }
                Combo mk{sid, {}};
                for (const Target &t : ins.targets) mk.recs.push_back(u32(meas - t.value));
                marks_.push_back(std::move(mk));
                break;
            }
            case Op::OBSERVABLE_INCLUDE: {
                Combo ob{u32(ins.param), {}};
                for (const Target &t : ins.targets) ob.recs.push_back(u32(meas - t.value));
                obs_recs_.push_back(std::move(ob));
                n_observables = std::max(n_observables, size_t(ins.param) + 1);
                break;
            }
            case Op::LOGICAL_FRAME: {
                FrameObs fo{u32(ins.param), steps_.size(), {}};
                for (const Target &t : ins.targets) {
                    u8 pk = t.kind == Target::PauliX ? 1 : t.kind == Target::PauliZ ? 2 : 3;
                    fo.paulis.push_back({pk, t.value});
                }
                frame_obs_.push_back(std::move(fo));
                n_observables = std::max(n_observables, size_t(ins.param) + 1);
                break;
            }
            default:
                require(info.is_gate, "frame sampler: unhandled instruction");
                require(info.is_clifford,
                        "frame sampler: non-Clifford gate " + std::string(info.name) +
                            " (use the statevector handoff backend)");
                for (size_t i = 0; i < ins.targets.size(); i += size_t(info.arity))
                    steps_.push_back({ins.op, ins.targets[i].value,
                                      info.arity > 1 ? ins.targets[i + 1].value : 0, 0});
        }
    }
    n_measurements = meas;
    n_detectors = detectors_.size();
}

BatchResult FrameSampler::sample_batch(u64 seed, u64 batch_index, size_t batch_size) const {
    size_t W = word_count(batch_size);
    BatchResult res;
    res.batch = batch_size;
    res.words = W;
    res.n_detectors = n_detectors;
    res.n_observables = n_observables;

    std::vector<u64> x(n_qubits * W, 0), z(n_qubits * W, 0);
    std::vector<u64> rec(n_measurements * W, 0);
    res.obs.assign(std::max<size_t>(n_observables, 1) * W, 0);
    Rng rng(seed, Rng::mix(batch_index) ^ 0xc1a0u);

    u64 tail_mask = (batch_size % 64) ? ((u64(1) << (batch_size % 64)) - 1) : ~u64(0);
    auto px = [&](u32 q) { return x.data() + size_t(q) * W; };
    auto pz = [&](u32 q) { return z.data() + size_t(q) * W; };

    size_t frame_obs_cursor = 0;
    auto eval_frame_obs = [&](size_t step_pos) {
        while (frame_obs_cursor < frame_obs_.size() &&
               frame_obs_[frame_obs_cursor].step_pos == step_pos) {
            const FrameObs &fo = frame_obs_[frame_obs_cursor];
            u64 *o = res.obs.data() + size_t(fo.obs) * W;
            for (auto [pk, q] : fo.paulis)
                for (size_t w = 0; w < W; w++) {
                    u64 v;
                    if (pk == 1) v = pz(q)[w];             // X target anticommutes with Z frame
                    else if (pk == 2) v = px(q)[w];        // Z target vs X frame
                    else v = px(q)[w] ^ pz(q)[w];          // Y target
                    o[w] ^= v;
                }
            frame_obs_cursor++;
        }
    };

    for (size_t si = 0; si < steps_.size(); si++) {
        eval_frame_obs(si);
        const Step &st = steps_[si];
        u64 *xa, *za, *xb, *zb;
        switch (st.op) {
            case Op::H:
                xa = px(st.a); za = pz(st.a);
                for (size_t w = 0; w < W; w++) std::swap(xa[w], za[w]);
                break;
            case Op::S: case Op::S_DAG: case Op::H_XY:
                xa = px(st.a); za = pz(st.a);
                for (size_t w = 0; w < W; w++) za[w] ^= xa[w];
                break;
            case Op::SQRT_X: case Op::SQRT_X_DAG:
                xa = px(st.a); za = pz(st.a);
                for (size_t w = 0; w < W; w++) xa[w] ^= za[w];
                break;
            case Op::X: case Op::Y: case Op::Z:
                break;
            case Op::CX:
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (size_t w = 0; w < W; w++) { xb[w] ^= xa[w]; za[w] ^= zb[w]; }
                break;
            case Op::CZ:
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (size_t w = 0; w < W; w++) { zb[w] ^= xa[w]; za[w] ^= xb[w]; }
                break;
            case Op::CY:
                // S_DAG b; CX a b; S b
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (size_t w = 0; w < W; w++) {
                    zb[w] ^= xb[w];
                    xb[w] ^= xa[w];
                    za[w] ^= zb[w];
                    zb[w] ^= xb[w];
                }
                break;
            case Op::SWAP:
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (size_t w = 0; w < W; w++) { std::swap(xa[w], xb[w]); std::swap(za[w], zb[w]); }
                break;
            case Op::R:
                xa = px(st.a); za = pz(st.a);
                for (size_t w = 0; w < W; w++) { xa[w] = 0; za[w] = 0; }
                break;
            case Op::M: {
                xa = px(st.a); za = pz(st.a);
                u64 *r = rec.data() + size_t(st.aux) * W;
                for (size_t w = 0; w < W; w++) {
                    r[w] = xa[w];
                    za[w] ^= rng.next();  // collapse randomizes the Z frame
                }
                break;
            }
            case Op::X_ERROR: {
                xa = px(st.a);
                for (u64 shot = rng.geometric(st.p); shot < batch_size;
                     shot += 1 + rng.geometric(st.p))
                    xa[shot / 64] ^= u64(1) << (shot % 64);
                break;
            }
            case Op::DEPOLARIZE1: {
                xa = px(st.a); za = pz(st.a);
                for (u64 shot = rng.geometric(st.p); shot < batch_size;
                     shot += 1 + rng.geometric(st.p)) {
                    u64 r = 1 + rng.below(3);
                    u64 bit = u64(1) << (shot % 64);
                    if (r & 1) xa[shot / 64] ^= bit;
                    if (r & 2) za[shot / 64] ^= bit;
                }
                break;
            }
            case Op::DEPOLARIZE2: {
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (u64 shot = rng.geometric(st.p); shot < batch_size;
                     shot += 1 + rng.geometric(st.p)) {
                    u64 r = 1 + rng.below(15);
                    u64 bit = u64(1) << (shot % 64);
                    if (r & 1) xa[shot / 64] ^= bit;
                    if (r & 2) za[shot / 64] ^= bit;
                    if (r & 4) xb[shot / 64] ^= bit;
                    if (r & 8) zb[shot / 64] ^= bit;
                }
                break;
            }
            case Op::DEPOLARIZE3: {
                u64 *xc = px(st.c), *zc = pz(st.c);
                xa = px(st.a); za = pz(st.a); xb = px(st.b); zb = pz(st.b);
                for (u64 shot = rng.geometric(st.p); shot < batch_size;
                     shot += 1 + rng.geometric(st.p)) {
                    u64 r = 1 + rng.below(63);
                    u64 bit = u64(1) << (shot % 64);
                    if (r & 1) xa[shot / 64] ^= bit;
                    if (r & 2) za[shot / 64] ^= bit;
                    if (r & 4) xb[shot / 64] ^= bit;
                    if (r & 8) zb[shot / 64] ^= bit;
                    if (r & 16) xc[shot / 64] ^= bit;
                    if (r & 32) zc[shot / 64] ^= bit;
                }
                break;
            }
            default:
                fail("frame sampler: bad step");
        }
    }
    eval_frame_obs(steps_.size());

    res.det.assign(std::max<size_t>(n_detectors, 1) * W, 0);
    for (const auto &d : detectors_) {
        u64 *out = res.det.data() + size_t(d.slot) * W;
        for (u32 ri : d.recs)
            for (size_t w = 0; w < W; w++) out[w] ^= rec[size_t(ri) * W + w];
    }
    res.stage_fail.assign(std::max<size_t>(stages.size(), 1) * W, 0);
    for (const auto &mk : marks_) {
        std::vector<u64> acc(W, 0);
        for (u32 ri : mk.recs)
            for (size_t w = 0; w < W; w++) acc[w] ^= rec[size_t(ri) * W + w];
        u64 *out = res.stage_fail.data() + size_t(mk.slot) * W;
        for (size_t w = 0; w < W; w++) out[w] |= acc[w];
    }
    for (const auto &ob : obs_recs_) {
        u64 *out = res.obs.data() + size_t(ob.slot) * W;
        for (u32 ri : ob.recs)
            for (size_t w = 0; w < W; w++) out[w] ^= rec[size_t(ri) * W + w];
    }
    // clear bits beyond batch_size in the last word
    auto trim = [&](std::vector<u64> &planes) {
        for (size_t base = W - 1; base < planes.size(); base += W) planes[base] &= tail_mask;
    };
    trim(res.det);
    trim(res.stage_fail);
    trim(res.obs);
    return res;
}

}  // namespace cultiv
