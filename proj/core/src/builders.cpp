#include "cultivator/builders.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "cultivator/refsim.hpp"
#include "cultivator/statevector.hpp"
#include "cultivator/synth.hpp"
#include "cultivator/tableau.hpp"

namespace cultiv {

void ProtocolConfig::validate() const {
    require(fault_distance == 3 || fault_distance == 5, "fault distance must be 3 or 5");
    require(d2 % 2 == 1 && d_fin % 2 == 1, "escape distances must be odd");
    require(d2 <= d_fin, "d2 must not exceed d_fin");
    require(n_checks >= 1, "at least one logical check");
    require(r1 >= 0 && r2 >= 0, "negative round counts");
    require(rounds_at_d2 >= 1, "rounds_at_d2 must be positive");
    require(gap_threshold >= 0, "gap threshold must be nonnegative");
    require(ghz_size >= 3, "GHZ size below 3");
    if (fault_distance == 3) {
        if (escape == EscapeKind::Hybrid)
            require(d2 == 7 && d_fin == 2 * d2 - 1,
                    "hybrid escape supports d2=7, d_fin=13 (unitary growth doubles the distance)");
        if (escape == EscapeKind::UnitaryOnly)
            require(d_fin == 5 || d_fin == 9 || d_fin == 17,
                    "unitary-only escape reaches distances 5, 9, 17 by doubling");
        if (escape == EscapeKind::StabilizerOnly) require(d_fin >= 5, "bad d_fin");
    } else {
        require(d_fin == 13, "f=5 escape targets d_fin=13");
        require(target_state == TargetState::Y,
                "f=5 handoff rejected: statevector cost (use the Y proxy)");
    }
}

ProtocolConfig ProtocolConfig::from_keyvals(const std::map<std::string, std::string> &kv) {
    ProtocolConfig cfg;
    auto geti = [&](const char *k, int def) {
        auto it = kv.find(k);
        return it == kv.end() ? def : std::stoi(it->second);
    };
    auto getd = [&](const char *k, double def) {
        auto it = kv.find(k);
        return it == kv.end() ? def : std::stod(it->second);
    };
    auto gets = [&](const char *k, std::string def) {
        auto it = kv.find(k);
        return it == kv.end() ? def : it->second;
    };
    std::string st = gets("target_state", "y");
    require(st == "y" || st == "hxy", "target_state must be y or hxy");
    cfg.target_state = st == "y" ? TargetState::Y : TargetState::HXY;
    cfg.fault_distance = geti("fault_distance", 3);
    std::string inj = gets("injection", "hook");
    if (inj == "hook") cfg.injection = InjectionKind::Hook;
    else if (inj == "unitary_plus_se") cfg.injection = InjectionKind::UnitaryPlusSE;
    else if (inj == "optimized_unitary") cfg.injection = InjectionKind::OptimizedUnitary;
    else fail("unknown injection kind '" + inj + "'");
    cfg.ghz_size = u32(geti("ghz_size", 3));
    cfg.n_checks = geti("n_checks", 2);
    std::string pre = gets("pre_escape_code", "reg3");
    if (pre == "rot3") cfg.pre_escape_code = PreEscapeCode::Rot3;
    else if (pre == "reg3") cfg.pre_escape_code = PreEscapeCode::Reg3;
    else if (pre == "rot5") cfg.pre_escape_code = PreEscapeCode::Rot5;
    else fail("unknown pre_escape_code '" + pre + "'");
    cfg.r1 = geti("r1", 2);
    cfg.r2 = geti("r2", 0);
    cfg.d2 = geti("d2", cfg.fault_distance == 5 ? 13 : 7);
    cfg.d_fin = geti("d_fin", 13);
    std::string esc = gets("escape", cfg.fault_distance == 5 ? "stabilizer_only" : "hybrid");
    if (esc == "hybrid") cfg.escape = EscapeKind::Hybrid;
    else if (esc == "stabilizer_only") cfg.escape = EscapeKind::StabilizerOnly;
    else if (esc == "unitary_only") cfg.escape = EscapeKind::UnitaryOnly;
    else fail("unknown escape kind '" + esc + "'");
    cfg.rounds_at_d2 = geti("rounds_at_d2", 3);
    cfg.gap_threshold = getd("gap_threshold", 0);
    std::string fr = gets("final_round", "perfect");
    if (fr == "noisy") cfg.final_round = FinalRoundMode::Noisy;
    else if (fr == "perfect") cfg.final_round = FinalRoundMode::Perfect;
    else if (fr == "off") cfg.final_round = FinalRoundMode::Off;
    else fail("unknown final_round mode '" + fr + "'");
    cfg.validate();
    return cfg;
}

// ---- growth solver ---------------------------------------------------------

GrowthPlan solve_two_layer_growth(const CodeLayout &src, const CodeLayout &dst,
                                  const std::map<u32, u32> &src_to_dst) {
    GrowthPlan plan;
    size_t n = dst.n();
    std::vector<bool> is_old(n, false);
    for (auto [s, d] : src_to_dst) is_old[d] = true;

    // affine transform from src coordinates to dst coordinates
    require(src_to_dst.size() >= 2, "need anchor points");
    auto it0 = src_to_dst.begin();
    auto it1 = std::next(it0);
    while (std::next(it1) != src_to_dst.end() &&
           src.data[it1->first].r == src.data[it0->first].r)
        ++it1;
    Coord s0 = src.data[it0->first], d0 = dst.data[it0->second];
    Coord s1 = src.data[it1->first], d1 = dst.data[it1->second];
    require(s1.r != s0.r, "anchor points degenerate");
    int den = s1.r - s0.r, num = d1.r - d0.r;
    require(den != 0 && num % den == 0, "non-integer scale");
    int scale = num / den;
    int off_r = d0.r - scale * s0.r, off_c = d0.c - scale * s0.c;
    auto to_dst = [&](Coord sc) { return Coord{scale * sc.r + off_r, scale * sc.c + off_c}; };

    struct NewQ {
        u32 dst_index;
        char basis;
        std::map<Coord, u32> nbr_by_dir;  // src-frame direction -> dst data index
    };
    std::vector<NewQ> news;
    for (u32 q = 0; q < n; q++) {
        if (is_old[q]) continue;
        Coord want = dst.data[q];
        const Stabilizer *found = nullptr;
        for (const auto *grp : {&src.x_stabs, &src.z_stabs})
            for (const auto &st : *grp)
                if (to_dst(st.site) == want) found = &st;
        require(found, "new qubit does not sit on a src check site");
        NewQ nq{q, found->basis, {}};
        for (u32 sq : found->support) {
            Coord dir{src.data[sq].r - found->site.r, src.data[sq].c - found->site.c};
            nq.nbr_by_dir[dir] = src_to_dst.at(sq);
        }
        news.push_back(std::move(nq));
    }

    std::vector<Coord> dirs;
    {
        std::set<Coord> ds;
        for (const auto &nq : news)
            for (const auto &[d, q] : nq.nbr_by_dir) ds.insert(d);
        dirs.assign(ds.begin(), ds.end());
    }

    // group tooling on the dst side
    auto gens_x = [&] {
        std::vector<PauliString> g;
        for (const auto &st : dst.x_stabs) g.push_back(dst.stab_pauli(st));
        return g;
    }();
    auto gens_z = [&] {
        std::vector<PauliString> g;
        for (const auto &st : dst.z_stabs) g.push_back(dst.stab_pauli(st));
        return g;
    }();

    // exact two-layer propagation of one generator through an ordered gate list
    struct Gate { bool anc_is_control; u32 anc, data; };
    auto propagate = [&](PauliString p, const std::vector<Gate> &l0,
                         const std::vector<Gate> &l1) {
        for (const auto *lay : {&l0, &l1})
            for (const auto &g : *lay) {
                u32 t[2] = {g.anc_is_control ? g.anc : g.data,
                            g.anc_is_control ? g.data : g.anc};
                conjugate_by_gate(p, Op::CX, t);
            }
        return p;
    };

    auto try_layers = [&](const std::vector<Gate> &l0, const std::vector<Gate> &l1) -> bool {
        // per-layer data collision check
        for (const auto *lay : {&l0, &l1}) {
            std::set<u32> seen;
            for (const auto &g : *lay) {
                if (!seen.insert(g.anc).second) return false;
                if (!seen.insert(g.data).second) return false;
            }
        }
        // generator images
        std::vector<PauliString> imgs;
        auto embed = [&](const PauliString &p) {
            PauliString q(n);
            for (auto [sq, dq] : src_to_dst) {
                if (p.x(sq)) q.set_x(dq, true);
                if (p.z(sq)) q.set_z(dq, true);
            }
            return q;
        };
        for (const auto &st : src.x_stabs) imgs.push_back(propagate(embed(src.stab_pauli(st)), l0, l1));
        for (const auto &st : src.z_stabs) imgs.push_back(propagate(embed(src.stab_pauli(st)), l0, l1));
        for (const auto &nq : news) {
            PauliString p(n);
            if (nq.basis == 'X') p.set_x(nq.dst_index, true);
            else p.set_z(nq.dst_index, true);
            imgs.push_back(propagate(p, l0, l1));
        }
        // every image must lie in the dst group with a + sign
        std::vector<PauliString> all_gens = gens_x;
        all_gens.insert(all_gens.end(), gens_z.begin(), gens_z.end());
        for (const auto &im : imgs) {
            int ph = 0;
            if (!in_group_mod_phase(im, all_gens, &ph) || ph != 0) return false;
        }
        // rank completeness: images must span the full group
        {
            size_t m2 = 2 * n;
            auto encode = [&](const PauliString &p) {
                std::vector<u64> row(word_count(m2));
                for (u32 q = 0; q < n; q++) {
                    if (p.x(q)) set_bit(row, q, true);
                    if (p.z(q)) set_bit(row, n + q, true);
                }
                return row;
            };
            auto rank_of = [&](const std::vector<PauliString> &ps) {
                std::vector<std::vector<u64>> rows;
                for (const auto &p : ps) rows.push_back(encode(p));
                size_t rank = 0;
                for (size_t col = 0; col < m2 && rank < rows.size(); col++) {
                    size_t piv = rank;
                    while (piv < rows.size() && !get_bit(rows[piv], col)) piv++;
                    if (piv == rows.size()) continue;
                    std::swap(rows[piv], rows[rank]);
                    for (size_t r = 0; r < rows.size(); r++)
                        if (r != rank && get_bit(rows[r], col)) xor_into(rows[r], rows[rank]);
                    rank++;
                }
                return rank;
            };
            if (rank_of(imgs) != all_gens.size()) return false;
        }
        // logicals map to dst logicals modulo stabilizers, sign +1
        {
            PauliString lx = propagate(embed(src.logical_x), l0, l1);
            PauliString diff = lx * dst.logical_x;
            int ph = 0;
            if (!in_group_mod_phase(diff, all_gens, &ph) || ph != 0) return false;
            PauliString lz = propagate(embed(src.logical_z), l0, l1);
            PauliString dz = lz * dst.logical_z;
            if (!in_group_mod_phase(dz, all_gens, &ph) || ph != 0) return false;
        }
        plan.gates.clear();
        for (const auto &g : l0) plan.gates.push_back({g.anc_is_control, g.anc, g.data, 0});
        for (const auto &g : l1) plan.gates.push_back({g.anc_is_control, g.anc, g.data, 1});
        return true;
    };

    auto gates_for = [&](Coord dx0, Coord dx1, Coord dz0, Coord dz1) {
        std::pair<std::vector<Gate>, std::vector<Gate>> layers;
        for (const auto &nq : news) {
            bool x = nq.basis == 'X';
            Coord c0 = x ? dx0 : dz0, c1 = x ? dx1 : dz1;
            auto a = nq.nbr_by_dir.find(c0);
            if (a != nq.nbr_by_dir.end()) layers.first.push_back({x, nq.dst_index, a->second});
            auto b = nq.nbr_by_dir.find(c1);
            if (b != nq.nbr_by_dir.end()) layers.second.push_back({x, nq.dst_index, b->second});
        }
        return layers;
    };

    bool found = false;
    for (Coord dx0 : dirs) {
        for (Coord dx1 : dirs) {
            if (found || dx0 == dx1) continue;
            for (Coord dz0 : dirs) {
                for (Coord dz1 : dirs) {
                    if (found || dz0 == dz1) continue;
                    auto [l0, l1] = gates_for(dx0, dx1, dz0, dz1);
                    found = try_layers(l0, l1);
                }
            }
        }
    }
    require(found, "growth solver: no two-layer coupling pattern found");
    for (auto &nq : news) {
        plan.new_qubits.push_back(nq.dst_index);
        plan.init_basis.push_back(nq.basis);
    }
    return plan;
}

// ---- fold circuits and gate counts ------------------------------------------

Circuit fold_s_circuit(const CodeLayout &reg) {
    require(reg.family == Family::Reg, "fold circuits need a Reg layout");
    Circuit c;
    c.n_qubits = reg.n();
    for (size_t i = 0; i < reg.diagonal.size(); i++)
        c.append(i % 2 == 0 ? Op::S : Op::S_DAG, {reg.diagonal[i]});
    for (u32 q : reg.below_diagonal) c.append(Op::CZ, {q, reg.tau[q]});
    return c;
}

Circuit fold_hxy_clifford_circuit(const CodeLayout &reg) {
    require(reg.family == Family::Reg, "fold circuits need a Reg layout");
    Circuit c;
    c.n_qubits = reg.n();
    // even diagonal: S X (= H_XY up to phase); odd: S_DAG X
    for (size_t i = 0; i < reg.diagonal.size(); i++) {
        c.append(Op::X, {reg.diagonal[i]});
        c.append(i % 2 == 0 ? Op::S : Op::S_DAG, {reg.diagonal[i]});
    }
    for (u32 q : reg.below_diagonal) c.append(Op::CZ, {q, reg.tau[q]});
    return c;
}

CheckGateCount hxy_check_gate_count(const CodeLayout &reg) {
    auto sites = check_sites(reg, CheckBasis::HxyFold);
    CheckGateCount out;
    for (const auto &s : sites)
        (s.qubits.size() == 1 ? out.two_qubit : out.three_qubit)++;
    return out;
}

}  // namespace cultiv
