#pragma once

#include "cultivator/circuit.hpp"
#include "cultivator/layout.hpp"
#include "cultivator/partition.hpp"

namespace cultiv {

enum class TargetState : u8 { Y, HXY };
enum class InjectionKind : u8 { Hook, UnitaryPlusSE, OptimizedUnitary };
enum class EscapeKind : u8 { Hybrid, StabilizerOnly, UnitaryOnly };
enum class PreEscapeCode : u8 { Rot3, Reg3, Rot5 };
enum class FinalRoundMode : u8 { Noisy, Perfect, Off };

struct ProtocolConfig {
    TargetState target_state = TargetState::Y;
    int fault_distance = 3;  // f in {3, 5}
    InjectionKind injection = InjectionKind::Hook;
    u32 ghz_size = 3;
    int n_checks = 2;
    PreEscapeCode pre_escape_code = PreEscapeCode::Reg3;
    int r1 = 2, r2 = 0;      // f=5 stabilizer rounds at Rot(5) / Reg(5)
    int d2 = 7;
    int d_fin = 13;
    EscapeKind escape = EscapeKind::Hybrid;
    int rounds_at_d2 = 3;
    double gap_threshold = 0;
    FinalRoundMode final_round = FinalRoundMode::Perfect;

    void validate() const;
    static ProtocolConfig from_keyvals(const std::map<std::string, std::string> &kv);
};

struct AssembledProtocol {
    ProtocolConfig config;

    // Y mode: the whole protocol. HXY mode: the statevector region
    // (injection through the second logical check, with trivial-branch marks).
    Circuit circuit;

    // HXY mode only: the stabilizer-side template. It prepares a logical
    // Pauli state of Reg(3) with a noiseless encoder, leaves a slot for the
    // destabilizer at `ds_insert_at`, and runs the rest of the protocol.
    Circuit stab_template;
    size_t ds_insert_at = 0;

    std::vector<std::string> stage_order;       // postselection stages, in order
    std::vector<std::pair<std::string, double>> stage_volumes;
    CodeLayout reg3;                            // handoff frame
    std::vector<u32> reg3_data_global;          // Reg(3) data index -> global qubit
};

AssembledProtocol assemble_protocol(const ProtocolConfig &cfg);

// ---- standalone stage builders (spec operations) --------------------------

// Hook injection on Rot(3): two stabilizer rounds with the misordered
// diagonal Z-plaquette and a mid-cycle S (Y) or T (HXY) on its ancilla.
Circuit hook_injection(TargetState state);

// Unitary encoder injection, either with a full stabilizer round or with the
// optimized 3-stabilizer verification.
Circuit unitary_injection(InjectionKind kind, TargetState state = TargetState::Y);

// Depth-2 morph from the Rot(3) codespace into Reg(3), on 13 local qubits
// (Rot(3) data = Reg(3) indices of the (even, even) sublattice).
Circuit morph_rot3_to_reg3();

// One GHZ-mediated logical check on `reg` (local indices; GHZ ancillas and
// the optional flag appended after the data qubits).
Circuit ghz_check(const CodeLayout &reg, const GhzPartition &partition, CheckBasis basis,
                  TargetState state);

// `rounds` rounds of Reg(d) syndrome extraction with hard postselect marks.
Circuit reg_stabilizer_round(const CodeLayout &reg, int rounds);

// The escape stage for `cfg`, standalone: a noiseless logical-state prep of
// the pre-escape code, then growth, stabilizer rounds, final round, readout.
Circuit escape_circuit(const ProtocolConfig &cfg);

// Injection test harness: the injection stage followed by a fictitious
// noiseless round on Rot(3) and a transversal logical readout; used by the
// LER calibration tests.
Circuit injection_harness(TargetState state, InjectionKind kind);

// Fold-transversal logical circuits on Reg(d) (Clifford forms).
Circuit fold_s_circuit(const CodeLayout &reg);
Circuit fold_hxy_clifford_circuit(const CodeLayout &reg);

// Gate counts of the controlled logical-H_XY check.
struct CheckGateCount { size_t two_qubit = 0, three_qubit = 0; };
CheckGateCount hxy_check_gate_count(const CodeLayout &reg);

// Two-layer code-growth solver: finds per-new-qubit couplings turning
// `src` (plus fresh qubits in the given bases) into `dst`.  Exposed for the
// morph verification tests.
struct GrowthGate { bool anc_is_control; u32 anc, data; int layer; };
struct GrowthPlan {
    std::vector<u32> new_qubits;      // dst data indices that are new
    std::vector<char> init_basis;     // 'X' -> |+>, 'Z' -> |0>
    std::vector<GrowthGate> gates;    // indices in dst data space
};
GrowthPlan solve_two_layer_growth(const CodeLayout &src, const CodeLayout &dst,
                                  const std::map<u32, u32> &src_to_dst);

}  // namespace cultiv
