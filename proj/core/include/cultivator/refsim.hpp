#pragma once

#include "cultivator/circuit.hpp"
#include "cultivator/layout.hpp"
#include "cultivator/tableau.hpp"

namespace cultiv {

// Measurement outcome (or any classical bit of a Clifford circuit) as an
// affine GF(2) function of the fresh random bits drawn at non-deterministic
// measurements: constant + XOR of variables.
struct AffineBit {
    bool constant = false;
    std::vector<u64> vars;

    bool is_constant() const { return !any_word(vars); }
    void operator^=(const AffineBit &o) {
        constant ^= o.constant;
        if (vars.size() < o.vars.size()) vars.resize(o.vars.size());
        for (size_t i = 0; i < o.vars.size(); i++) vars[i] ^= o.vars[i];
    }
    bool operator==(const AffineBit &o) const;
};

// Exact stabilizer simulator whose measurement record is symbolic: every
// fresh random outcome becomes a new variable, and every later bit is an
// affine combination. Used by the builders to place detectors, postselection
// marks, and observable corrections, and by tests as the reference backend.
struct RefSim {
    size_t n = 0;
    std::vector<PauliString> rows;   // destabilizers [0, n), stabilizers [n, 2n)
    std::vector<std::vector<u64>> row_vars;  // (-1)^<vars> part of each row sign
    size_t n_vars = 0;
    std::vector<AffineBit> record;   // one entry per measurement

    explicit RefSim(size_t n_qubits);

    void apply_gate(Op op, const u32 *targets);
    AffineBit measure_z(u32 q);
    void reset_z(u32 q);

    // Full circuit walk (noise channels are skipped: this is the noiseless
    // reference). Annotations are ignored.
    void run(const Circuit &c);

    // Current +/- sign of a stabilizer-group element `p`; requires that p is
    // in the group generated by the current stabilizer rows.
    AffineBit group_element_sign(const PauliString &p) const;

    // Is `p` (mod phase) in the current stabilizer group?
    bool stabilizes(const PauliString &p) const;
};

// Plain tableau of a measurement-free Clifford circuit.
CliffordTableau tableau_run(const Circuit &c, size_t n_qubits);

// Checks that a Clifford circuit maps each (input logical or stabilizer,
// expected image) pair correctly modulo the output stabilizer group,
// including the sign.  `stab_out` are +1 generators of the output group.
bool verify_logical_action(const Circuit &c, size_t n_qubits,
                           const std::vector<PauliString> &stab_out,
                           const std::vector<std::pair<PauliString, PauliString>> &maps);

// Gaussian solver over measurement records: find a subset of candidate
// record indices whose XOR cancels the variable part of `target`.
struct WiringSolve {
    bool ok = false;
    bool constant = false;           // value of target ^ chosen records
    std::vector<u32> records;        // chosen record indices
};
WiringSolve solve_wiring(const std::vector<AffineBit> &record, const AffineBit &target,
                         const std::vector<u32> &candidates);

}  // namespace cultiv
