#include "doctest.h"

#include <cmath>

#include "cultivator/statevector.hpp"

using namespace cultiv;

TEST_CASE("born rule: H then measure is fair") {
    size_t ones = 0;
    const int n = 10000;
    for (int i = 0; i < n; i++) {
        StateVector sv;
        Rng rng(u64(i), 1);
        sv.ensure(0);
        sv.apply_gate(Op::H, (const u32[]){0});
        ones += sv.measure_z(0, rng);
    }
    // within 4 sigma of fair
    double sigma = std::sqrt(0.25 / n);
    CHECK(std::abs(double(ones) / n - 0.5) < 4 * sigma + 1e-9);
}

TEST_CASE("CCZ phases the |111> component only") {
    StateVector sv;
    for (u32 q : {0u, 1u, 2u}) {
        sv.ensure(q);
        u32 t[1] = {q};
        sv.apply_gate(Op::H, t);
    }
    sv.apply_gate(Op::CCZ, (const u32[]){0, 1, 2});
    // amplitude of |111> is negative, all others positive
    for (size_t i = 0; i < 8; i++) {
        double expected = (i == 7) ? -1.0 : 1.0;
        CHECK(sv.amps[i].real() == doctest::Approx(expected / std::sqrt(8.0)));
        CHECK(sv.amps[i].imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("gates preserve norm") {
    Rng rng(3);
    StateVector sv;
    for (u32 q = 0; q < 5; q++) sv.ensure(q);
    std::vector<Op> ops = {Op::H, Op::S, Op::T, Op::SQRT_X, Op::H_XY, Op::G_X, Op::G_Y,
                           Op::CX, Op::CZ, Op::CY, Op::CCZ, Op::CSX, Op::CSX_DAG};
    for (int i = 0; i < 200; i++) {
        Op op = ops[rng.below(ops.size())];
        int ar = op_info(op).arity;
        u32 t[3] = {u32(rng.below(5)), 0, 0};
        if (ar >= 2) t[1] = (t[0] + 1 + u32(rng.below(4))) % 5;
        if (ar == 3) {
            t[2] = (t[1] + 1 + u32(rng.below(3))) % 5;
            if (t[2] == t[0]) t[2] = (t[2] + 1) % 5;
            if (t[2] == t[1]) t[2] = (t[2] + 1) % 5;
            if (t[2] == t[0]) t[2] = (t[2] + 1) % 5;
        }
        sv.apply_gate(op, t);
        CHECK(sv.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("T on |+> gives the magic state; H_XY fixes it") {
    StateVector sv;
    sv.ensure(0);
    sv.apply_gate(Op::H, (const u32[]){0});
    sv.apply_gate(Op::T, (const u32[]){0});
    // |H_XY> = (|0> + e^{i pi/4} |1>)/sqrt(2), +1 eigenstate of H_XY
    StateVector ref = sv;
    sv.apply_gate(Op::H_XY, (const u32[]){0});
    cplx ip = sv.inner(ref);
    CHECK(std::abs(ip - cplx(1, 0)) < 1e-10);
}

TEST_CASE("G_X and G_Y conjugate Z into the fold factors") {
    // G_X Z G_X^dag == H_XY (+1 phase) as a matrix identity; check action
    StateVector a, b;
    a.ensure(0);
    b.ensure(0);
    a.apply_gate(Op::H, (const u32[]){0});
    a.apply_gate(Op::T, (const u32[]){0});  // |H_XY>
    b = a;
    // a: apply G_X Z G_X_DAG
    a.apply_gate(Op::G_X_DAG, (const u32[]){0});
    a.apply_gate(Op::Z, (const u32[]){0});
    a.apply_gate(Op::G_X, (const u32[]){0});
    CHECK(std::abs(a.inner(b) - cplx(1, 0)) < 1e-10);
}

TEST_CASE("sv_run: postselect aborts on nontrivial bit") {
    Circuit c = parse_circuit("R 0\nTICK\nX 0\nM 0\nPOSTSELECT(inj) rec[-1]\n");
    auto res = sv_run(c, 1);
    CHECK(!res.kept);
    CHECK(res.discard_stage == "inj");
    // with the expected-parity parameter the same outcome passes
    Circuit c2 = parse_circuit("R 0\nTICK\nX 0\nM 0\nPOSTSELECT(inj, width=1) rec[-1]\n");
    // note: width reuse not valid for POSTSELECT; use param-free variant
    (void)c2;
}

TEST_CASE("sv_run: forced-trivial reference reproduces deterministic bits") {
    Circuit c = parse_circuit("R 0 1\nTICK\nH 0\nCX 0 1\nTICK\nM 0 1\n");
    auto res = sv_run(c, 99, true);
    REQUIRE(res.record.size() == 2);
    CHECK(!res.record[0]);
    CHECK(!res.record[1]);  // correlated with the first, forced branch 0
    // deterministic-1 outcome survives forcing
    Circuit c2 = parse_circuit("R 0\nTICK\nX 0\nTICK\nM 0\n");
    auto r2 = sv_run(c2, 99, true);
    CHECK(r2.record[0]);
}

TEST_CASE("drop reclaims measured qubits") {
    StateVector sv;
    Rng rng(4);
    sv.ensure(0);
    sv.ensure(1);
    sv.apply_gate(Op::H, (const u32[]){0});
    sv.apply_gate(Op::CX, (const u32[]){0, 1});
    sv.measure_z(1, rng);
    sv.drop(1);
    CHECK(sv.live() == 1);
    CHECK(sv.amps.size() == 2);
    CHECK(sv.norm() == doctest::Approx(1.0));
}

TEST_CASE("qubit cap enforced") {
    StateVector sv;
    sv.cap = 3;
    sv.ensure(0);
    sv.ensure(1);
    sv.ensure(2);
    CHECK_THROWS_AS(sv.ensure(3), Error);
}
