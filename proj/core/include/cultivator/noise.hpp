#pragma once

#include "cultivator/circuit.hpp"

namespace cultiv {

struct NoiseModel {
    enum Kind : u8 { SD6, PM } kind = SD6;
    double p = 1e-3;

    static NoiseModel sd6(double p) { return {SD6, p}; }
    static NoiseModel pm(double p) { return {PM, p}; }
    static NoiseModel from_name(std::string_view name, double p);
};

// Applies a noise model to an ideal circuit:
//  - n-qubit depolarizing after each unitary at the model's rate,
//  - X_ERROR(p) after each reset and before each measurement,
//  - SD6 only: single-qubit depolarizing on idle qubits in every tick layer.
// PM first rewrites CX and CY into CZ plus single-qubit rotations and rates
// nonlocal-flagged CZ gates at 5p.  Instructions in stages whose name starts
// with `exempt_prefix` are left noiseless (the fictitious final round).
Circuit apply_noise(const Circuit &ideal, const NoiseModel &m,
                    std::string_view exempt_prefix = "final");

}  // namespace cultiv
