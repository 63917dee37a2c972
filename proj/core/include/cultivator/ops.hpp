#pragma once

#include <string_view>

#include "cultivator/common.hpp"

namespace cultiv {

enum class Op : u8 {
    // resets / measurements (Z basis)
    R, M,
    TICK,
    // single-qubit gates
    H, S, S_DAG, X, Y, Z, SQRT_X, SQRT_X_DAG, H_XY, T, T_DAG, G_X, G_X_DAG, G_Y, G_Y_DAG,
    // two-qubit gates
    CX, CY, CZ, SWAP, CSX, CSX_DAG,
    // three-qubit gate
    CCZ,
    // noise channels
    DEPOLARIZE1, DEPOLARIZE2, DEPOLARIZE3, X_ERROR,
    // annotations
    DETECTOR, OBSERVABLE_INCLUDE, POSTSELECT, STAGE, LOGICAL_FRAME,
};

struct OpInfo {
    std::string_view name;
    int arity;        // qubits per gate application (0 for annotations/tick)
    bool is_gate;     // unitary gate
    bool is_clifford; // simulable on the stabilizer backends
    bool has_param;
};

const OpInfo &op_info(Op op);
Op op_from_name(std::string_view name, bool &nonlocal);

}  // namespace cultiv
