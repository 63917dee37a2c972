#pragma once

#include "cultivator/ops.hpp"
#include "cultivator/pauli.hpp"

namespace cultiv {

// Heisenberg-picture conjugation of a Pauli by a named Clifford gate,
// in place, with exact phase tracking. Shared by the tableau, the frame
// simulator (which ignores the phase) and the error propagator.
void conjugate_by_gate(PauliString &p, Op op, const u32 *targets);

// Clifford unitary represented by the images of X_q and Z_q under U . U^dag.
struct CliffordTableau {
    size_t n = 0;
    std::vector<PauliString> x_images, z_images;

    CliffordTableau() = default;
    static CliffordTableau identity(size_t n);

    // T := G o T (append gate to the circuit this tableau represents).
    void append(Op op, const u32 *targets);
    void append(Op op, std::initializer_list<u32> targets) { append(op, targets.begin()); }

    PauliString conjugate(const PauliString &p) const;  // U p U^dag
    CliffordTableau then(const CliffordTableau &second) const;
    CliffordTableau inverse() const;
    bool is_valid() const;
    bool is_identity() const;
};

// Reduce p modulo the group generated by `gens` (signs included):
// returns true and the sign-matched residue factorization if p is in the
// group times a +/-1 sign; `sign_out` receives the displayed sign exponent
// (0 or 2) of p relative to the product found.  Used to compare logical
// images "up to stabilizers".
bool in_group_mod_phase(const PauliString &p, const std::vector<PauliString> &gens,
                        int *phase_out);

}  // namespace cultiv
