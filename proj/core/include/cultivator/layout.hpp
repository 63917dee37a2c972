#pragma once

#include <map>

#include "cultivator/pauli.hpp"

namespace cultiv {

enum class Family : u8 { Rot, Reg };

struct Coord {
    int r = 0, c = 0;
    auto operator<=>(const Coord &) const = default;
};

struct Stabilizer {
    Coord site;
    char basis;  // 'X' or 'Z'
    std::vector<u32> support;  // data-qubit indices
};

// Geometry and group data for one code patch, in its own compact integer
// frame: Rot(d) data live at (2i, 2j), Reg(d) data at r+c even on the
// (2d-1) x (2d-1) grid, so the fold map tau is the matrix transpose.
struct CodeLayout {
    Family family = Family::Rot;
    int d = 0;
    std::vector<Coord> data;
    std::map<Coord, u32> data_index;
    std::vector<Stabilizer> x_stabs, z_stabs;
    PauliString logical_x, logical_z;

    // Reg(d) only: fold structure.
    std::vector<u32> diagonal;        // D_0 .. D_{2d-2} in order
    std::vector<u32> below_diagonal;  // the set Delta (r > c)
    std::vector<u32> tau;             // involution on data indices

    size_t n() const { return data.size(); }
    PauliString stab_pauli(const Stabilizer &s) const;
    std::vector<PauliString> all_stab_paulis() const;
    const Stabilizer *stab_at(Coord site) const;
};

CodeLayout build_layout(Family family, int d);

// Rot(d) with the complementary plaquette checkerboard (the variant produced
// by two-layer growth out of an unrotated patch).
CodeLayout build_rot_flipped(int d);

struct FoldData {
    std::vector<u32> diagonal;
    std::vector<std::pair<u32, u32>> pairs;  // (q, tau(q)) with q below the diagonal
};
FoldData fold_data(const CodeLayout &layout);

// Pauli destabilizer for syndrome s over (z_stabs then x_stabs) bit order:
// X strings route Z syndromes to the bottom boundary, Z strings route X
// syndromes to the right boundary.
PauliString destabilizer_for_syndrome(const CodeLayout &layout, const std::vector<bool> &s);

// Exact GF(2) test: does the subset `support` of data qubits carry an
// undetectable logical operator (an element of the stabilizer centralizer
// that is not a stabilizer product)?
bool subset_supports_logical(const CodeLayout &layout, const std::vector<bool> &support);

// All X-type (or Z-type) logical representatives with weight <= max_weight,
// by exhaustive closure over stabilizer products. Exact; intended for d <= 5.
std::vector<PauliString> low_weight_logicals(const CodeLayout &layout, char basis,
                                             size_t max_weight);

std::string layout_to_json(const CodeLayout &layout);

}  // namespace cultiv
