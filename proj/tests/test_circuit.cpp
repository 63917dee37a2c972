#include "doctest.h"

#include "cultivator/circuit.hpp"
#include "cultivator/rng.hpp"

using namespace cultiv;

TEST_CASE("parse basics") {
    Circuit c = parse_circuit("R 0\nH 0\nM 0\nDETECTOR rec[-1]\n");
    CHECK(c.n_qubits == 1);
    CHECK(c.num_measurements() == 1);
    CHECK(c.instructions.size() == 4);
    CHECK(c.instructions[3].op == Op::DETECTOR);

    Circuit c3 = parse_circuit("CCZ 0 1 2\n");
    CHECK(c3.instructions.size() == 1);
    CHECK(c3.instructions[0].targets.size() == 3);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_circuit("H 0\nFROB 1\n"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_AS(parse_circuit("M 0\nDETECTOR rec[-2]\n"), Error);
    CHECK_THROWS_AS(parse_circuit("DEPOLARIZE1(1.5) 0\n"), Error);
    CHECK_THROWS_AS(parse_circuit("CCZ 0 1 1\n"), Error);
}

TEST_CASE("emit is canonical and parse/emit round-trips") {
    CHECK(emit_circuit(Circuit{}) == "");
    std::string text =
        "STAGE(inject)\n"
        "R 0 1 2\n"
        "TICK\n"
        "H 0\n"
        "TICK\n"
        "CZ* 0 2\n"
        "DEPOLARIZE2(0.001) 0 2\n"
        "TICK\n"
        "X_ERROR(0.001) 1\n"
        "M 1\n"
        "POSTSELECT(inject) rec[-1]\n"
        "M 0 2\n"
        "DETECTOR rec[-1] rec[-2]\n"
        "OBSERVABLE_INCLUDE(0) rec[-2]\n"
        "LOGICAL_FRAME(1) X0 Z2\n";
    Circuit c = parse_circuit(text);
    CHECK(c.instructions[5].nonlocal);
    std::string round = emit_circuit(c);
    CHECK(round == text);
    CHECK(emit_circuit(parse_circuit(round)) == round);
}

TEST_CASE("random circuits are a fixed point of parse-emit") {
    Rng rng(123);
    for (int trial = 0; trial < 1000; trial++) {
        Circuit c;
        c.n_qubits = 5;
        size_t measured = 0;
        int len = 1 + int(rng.below(12));
        for (int i = 0; i < len; i++) {
            switch (rng.below(8)) {
                case 0: c.append(Op::H, {u32(rng.below(5))}); break;
                case 1: {
                    u32 a = u32(rng.below(5)), b = u32(rng.below(5));
                    if (a == b) b = (b + 1) % 5;
                    Instruction ins{Op::CX, {Target::qubit(a), Target::qubit(b)}, 0, "", rng.below(2) == 0, -1};
                    c.append(ins);
                    break;
                }
                case 2: c.append({Op::TICK, {}, 0, "", false, -1}); break;
                case 3: c.append(Op::R, {u32(rng.below(5))}); break;
                case 4: c.append(Op::M, {u32(rng.below(5))}); measured++; break;
                case 5: c.append(Op::DEPOLARIZE1, {u32(rng.below(5))}, 0.25 * double(1 + rng.below(3))); break;
                case 6:
                    if (measured) {
                        Instruction ins{Op::DETECTOR, {Target::rec(u32(1 + rng.below(measured)))}, 0, "", false, -1};
                        c.append(ins);
                    }
                    break;
                case 7: {
                    Instruction ins{Op::STAGE, {}, 0, "s" + std::to_string(rng.below(3)), false, -1};
                    c.append(ins);
                    break;
                }
            }
        }
        std::string e1 = emit_circuit(c);
        std::string e2 = emit_circuit(parse_circuit(e1));
        CHECK(e1 == e2);
    }
}

TEST_CASE("stage marks preserved in order") {
    std::string text = "STAGE(a)\nH 0\nTICK\nSTAGE(b)\nH 1\n";
    Circuit c = parse_circuit(text);
    CHECK(emit_circuit(c) == text);
}

TEST_CASE("stats: widths, depths, histogram") {
    std::string text =
        "STAGE(one)\n"
        "R 0 1 2 3\n"
        "TICK\n"
        "H 0 1\n"
        "TICK\n"
        "CX 0 2\n"
        "CZ* 1 3\n"
        "TICK\n"
        "M 0 1 2 3\n";
    ResourceStats rs = circuit_stats(parse_circuit(text));
    REQUIRE(rs.stages.size() == 1);
    CHECK(rs.stages[0].qubits == 4);
    CHECK(rs.stages[0].depth == 4);
    CHECK(rs.hist.q1 == 2);
    CHECK(rs.hist.q2_local == 1);
    CHECK(rs.hist.q2_nonlocal == 1);
    CHECK(rs.hist.init == 4);
    CHECK(rs.hist.measure == 4);
}

TEST_CASE("stats: empty stage and width override") {
    Circuit c = parse_circuit("STAGE(empty)\nSTAGE(w, width=13)\nH 0\n");
    ResourceStats rs = circuit_stats(c);
    const StageStats *e = rs.stage("empty");
    REQUIRE(e != nullptr);
    CHECK(e->qubits == 0);
    CHECK(e->depth == 0);
    const StageStats *w = rs.stage("w");
    REQUIRE(w != nullptr);
    CHECK(w->qubits == 13);
    CHECK(w->depth == 1);
}

TEST_CASE("stats: interleaved stages count their own layers") {
    // two stages sharing tick layers, as in pipelined GHZ preparation
    std::string text =
        "STAGE(a)\nH 0\nSTAGE(b)\nR 5\nTICK\n"
        "STAGE(a)\nCX 0 1\nSTAGE(b)\nH 5\nTICK\n"
        "STAGE(b)\nCX 5 6\n";
    ResourceStats rs = circuit_stats(parse_circuit(text));
    CHECK(rs.stage("a")->qubits == 2);
    CHECK(rs.stage("a")->depth == 2);
    CHECK(rs.stage("b")->qubits == 2);
    CHECK(rs.stage("b")->depth == 3);
}
