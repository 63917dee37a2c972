#pragma once

#include <complex>
#include <map>

#include "cultivator/circuit.hpp"
#include "cultivator/pauli.hpp"
#include "cultivator/rng.hpp"

namespace cultiv {

using cplx = std::complex<double>;

// Dense amplitude simulator. Qubits are allocated lazily on first use, so a
// circuit over hundreds of indices is fine as long as at most `cap` qubits
// are live at once; measured qubits can be dropped to reclaim space.
struct StateVector {
    std::vector<cplx> amps{1.0};
    std::map<u32, int> slot;  // circuit qubit index -> bit position
    size_t cap = 24;

    size_t live() const { return slot.size(); }
    int ensure(u32 q);

    void apply1(u32 q, const cplx m[2][2]);
    void apply_cphase(const std::vector<u32> &controls_and_target, cplx phase);
    void apply2(u32 a, u32 b, const cplx m[4][4]);
    void apply_gate(Op op, const u32 *targets);
    void apply_pauli(const PauliString &p, const std::vector<u32> &qubits);

    double prob_one(u32 q) const;
    // Born-rule measurement with collapse; if forced >= 0 project on that
    // outcome instead (error if its probability is below 1e-12).
    bool measure_z(u32 q, Rng &rng, int forced = -1);
    void reset_z(u32 q, Rng &rng);
    void drop(u32 q);  // after measurement/reset: factor the qubit out

    double norm() const;
    void normalize();
    cplx inner(const StateVector &other) const;  // <other|this>, same slot map
};

struct SvRunResult {
    StateVector state;
    std::vector<bool> record;
    bool kept = true;
    std::string discard_stage;
};

// Runs a circuit slice on the dense simulator. Pauli noise channels are
// realized by sampling explicit Pauli insertions. POSTSELECT marks are
// evaluated on the fly; a nontrivial mark aborts the run with kept = false.
// With `force_trivial`, every measurement is projected onto the expected
// postselected branch instead of sampled (used to compute reference values).
SvRunResult sv_run(const Circuit &c, u64 seed, bool force_trivial = false,
                   size_t qubit_cap = 24);

}  // namespace cultiv
