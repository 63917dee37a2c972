#pragma once

#include "cultivator/circuit.hpp"
#include "cultivator/layout.hpp"

namespace cultiv {

// Unitary CSS encoder: maps (alpha|0> + beta|1>) on `input_qubit` times |0>
// elsewhere to the encoded logical state of the layout, in the +1 eigenspace
// of every stabilizer.  Gate fans follow the reduced row echelon form of the
// X-stabilizer matrix.  Qubit indices in the returned circuit are the
// layout's data indices.
Circuit css_encoder(const CodeLayout &layout, u32 input_qubit);

}  // namespace cultiv
