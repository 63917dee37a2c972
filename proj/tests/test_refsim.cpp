#include "doctest.h"

#include "cultivator/layout.hpp"
#include "cultivator/refsim.hpp"
#include "cultivator/rng.hpp"
#include "cultivator/synth.hpp"

using namespace cultiv;

TEST_CASE("refsim basics: deterministic and random measurements") {
    // |0> measurement deterministic 0
    RefSim sim(2);
    auto m0 = sim.measure_z(0);
    CHECK(m0.is_constant());
    CHECK(!m0.constant);
    // H then measure: random
    sim.apply_gate(Op::H, (const u32[]){1});
    auto m1 = sim.measure_z(1);
    CHECK(!m1.is_constant());
    // measuring again gives the same variable
    auto m2 = sim.measure_z(1);
    CHECK(m1 == m2);
}

TEST_CASE("refsim: X flip gives deterministic 1; reset clears") {
    RefSim sim(1);
    sim.apply_gate(Op::X, (const u32[]){0});
    auto m = sim.measure_z(0);
    CHECK(m.is_constant());
    CHECK(m.constant);
    sim.reset_z(0);
    auto m2 = sim.measure_z(0);
    CHECK(m2.is_constant());
    CHECK(!m2.constant);
}

TEST_CASE("refsim: bell pair correlations become shared variables") {
    RefSim sim(2);
    sim.apply_gate(Op::H, (const u32[]){0});
    sim.apply_gate(Op::CX, (const u32[]){0, 1});
    auto a = sim.measure_z(0);
    auto b = sim.measure_z(1);
    CHECK(!a.is_constant());
    CHECK(a == b);  // perfectly correlated
    AffineBit sum = a;
    sum ^= b;
    CHECK(sum.is_constant());
    CHECK(!sum.constant);
}

TEST_CASE("refsim: stabilizer sign tracking through a small code") {
    // prepare |0> logical of Reg(3) via the encoder and check stabilizers
    auto L = build_layout(Family::Reg, 3);
    u32 inj = L.logical_x.x(0) ? 0 : 0;
    Circuit enc = css_encoder(L, inj);
    RefSim sim(L.n());
    sim.run(enc);
    for (const auto &s : L.all_stab_paulis()) CHECK(sim.stabilizes(s));
    CHECK(sim.stabilizes(L.logical_z));  // |0> logical: Z-bar stabilizes
    CHECK(!sim.stabilizes(L.logical_x));
    auto sign = sim.group_element_sign(L.logical_z);
    CHECK(sign.is_constant());
    CHECK(!sign.constant);  // +1
}

TEST_CASE("encoder works for Rot(3) and Rot(5) and Reg(5)") {
    for (auto [fam, d] : {std::pair{Family::Rot, 3}, {Family::Rot, 5}, {Family::Reg, 5}}) {
        auto L = build_layout(fam, d);
        Circuit enc = css_encoder(L, 0);
        RefSim sim(L.n());
        sim.run(enc);
        for (const auto &s : L.all_stab_paulis()) {
            CHECK(sim.stabilizes(s));
            auto sg = sim.group_element_sign(s);
            CHECK(sg.is_constant());
            CHECK(!sg.constant);
        }
        CHECK(sim.stabilizes(L.logical_z));
    }
}

TEST_CASE("verify_logical_action: identity and fold S on Reg(3)") {
    auto L = build_layout(Family::Reg, 3);
    Circuit id;
    id.n_qubits = L.n();
    std::vector<std::pair<PauliString, PauliString>> maps = {
        {L.logical_x, L.logical_x}, {L.logical_z, L.logical_z}};
    CHECK(verify_logical_action(id, L.n(), L.all_stab_paulis(), maps));

    // fold S: S on even diagonal, S_DAG on odd, CZ on mirrored pairs
    Circuit s;
    s.n_qubits = L.n();
    for (size_t i = 0; i < L.diagonal.size(); i++)
        s.append(i % 2 == 0 ? Op::S : Op::S_DAG, {L.diagonal[i]});
    for (u32 q : L.below_diagonal) s.append(Op::CZ, {q, L.tau[q]});
    PauliString ybar = L.logical_x * L.logical_z;
    ybar.phase = u8((ybar.phase + 1) & 3);  // Y = i X Z
    std::vector<std::pair<PauliString, PauliString>> smaps = {
        {L.logical_x, ybar}, {L.logical_z, L.logical_z}};
    CHECK(verify_logical_action(s, L.n(), L.all_stab_paulis(), smaps));
    // wrong sign must fail
    PauliString neg_y = ybar;
    neg_y.phase = u8((neg_y.phase + 2) & 3);
    std::vector<std::pair<PauliString, PauliString>> bad = {{L.logical_x, neg_y}};
    CHECK(!verify_logical_action(s, L.n(), L.all_stab_paulis(), bad));
}

TEST_CASE("wiring solver finds record subsets") {
    RefSim sim(3);
    sim.apply_gate(Op::H, (const u32[]){0});
    sim.apply_gate(Op::CX, (const u32[]){0, 1});
    sim.apply_gate(Op::CX, (const u32[]){0, 2});
    auto a = sim.measure_z(0);  // rec 0: random v
    auto b = sim.measure_z(1);  // rec 1: same v
    auto c = sim.measure_z(2);  // rec 2: same v
    std::vector<AffineBit> rec = {a, b, c};
    // target: the outcome of qubit 2 (affine in v); candidates rec0, rec1
    auto sol = solve_wiring(rec, c, {0, 1});
    CHECK(sol.ok);
    CHECK(sol.records.size() == 1);
    CHECK(!sol.constant);
    // unsolvable: no candidates
    auto bad = solve_wiring(rec, c, {});
    CHECK(!bad.ok);
}

TEST_CASE("refsim matches statistics invariants on random Clifford circuits") {
    // determinism checks: rerunning the same circuit gives identical record
    Rng rng(1);
    for (int trial = 0; trial < 20; trial++) {
        size_t n = 4;
        Circuit c;
        c.n_qubits = n;
        for (int i = 0; i < 30; i++) {
            switch (rng.below(6)) {
                case 0: c.append(Op::H, {u32(rng.below(n))}); break;
                case 1: c.append(Op::S, {u32(rng.below(n))}); break;
                case 2: {
                    u32 a = u32(rng.below(n)), b = u32(rng.below(n));
                    if (a == b) b = (b + 1) % n;
                    c.append(Op::CX, {a, b});
                    break;
                }
                case 3: c.append(Op::M, {u32(rng.below(n))}); break;
                case 4: c.append(Op::R, {u32(rng.below(n))}); break;
                case 5: c.append(Op::CZ, {u32(rng.below(n)), u32((rng.below(n - 1) + 1 + rng.below(n)) % n)}); break;
            }
        }
        // drop invalid CZ with equal targets
        for (auto &ins : c.instructions)
            if (ins.op == Op::CZ && ins.targets[0].value == ins.targets[1].value)
                ins.targets[1].value = (ins.targets[1].value + 1) % n;
        RefSim s1(n), s2(n);
        s1.run(c);
        s2.run(c);
        REQUIRE(s1.record.size() == s2.record.size());
        for (size_t i = 0; i < s1.record.size(); i++) CHECK(s1.record[i] == s2.record[i]);
    }
}
