#pragma once

#include <map>
#include <optional>
#include <string>

#include "cultivator/ops.hpp"

namespace cultiv {

// Instruction targets are tagged 32-bit values: plain qubit indices,
// measurement-record lookbacks rec[-k], or Pauli targets X5/Y5/Z5 used by
// LOGICAL_FRAME annotations.
struct Target {
    enum Kind : u8 { Qubit, Rec, PauliX, PauliY, PauliZ };
    Kind kind = Qubit;
    u32 value = 0;  // qubit index, or lookback distance k (rec[-k])

    static Target qubit(u32 q) { return {Qubit, q}; }
    static Target rec(u32 lookback) { return {Rec, lookback}; }
    static Target pauli(char letter, u32 q);
    bool operator==(const Target &o) const = default;
};

struct Instruction {
    Op op;
    std::vector<Target> targets;
    double param = 0;        // probability, or observable index
    std::string label;       // stage / postselect name
    bool nonlocal = false;   // declared at build time for 2- and 3-qubit gates
    int stage_width = -1;    // optional explicit width on STAGE marks

    bool is_annotation() const;
    bool operator==(const Instruction &o) const = default;
};

struct StageStats {
    std::string name;
    size_t qubits = 0;   // active qubits (touched, or declared width override)
    size_t depth = 0;    // tick layers containing instructions of this stage
    size_t volume() const { return qubits * depth; }
};

struct GateHistogram {
    size_t q1 = 0, q2_local = 0, q2_nonlocal = 0, q3 = 0, init = 0, measure = 0;
};

struct ResourceStats {
    std::vector<StageStats> stages;
    GateHistogram hist;
    size_t total_depth = 0;

    const StageStats *stage(const std::string &name) const;
};

struct Circuit {
    size_t n_qubits = 0;
    std::vector<Instruction> instructions;

    size_t num_measurements() const;
    size_t num_observables() const;
    bool has_noise() const;
    void validate() const;

    void append(Instruction ins);
    void append(Op op, std::initializer_list<u32> qubits, double param = 0);
    Circuit operator+(const Circuit &tail) const;
};

Circuit parse_circuit(std::string_view text);
std::string emit_circuit(const Circuit &c);
ResourceStats circuit_stats(const Circuit &c);

}  // namespace cultiv
