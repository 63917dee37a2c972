#pragma once

#include "cultivator/layout.hpp"

namespace cultiv {

enum class CheckBasis : u8 { YTransversal, HxyFold };

// One controlled-gate site of a logical check: the data qubits the gate
// touches. Fold checks have one site per diagonal qubit and one per mirrored
// pair; transversal Y checks have one site per qubit of the pure-Y logical.
struct CheckSite {
    std::vector<u32> qubits;
};

std::vector<CheckSite> check_sites(const CodeLayout &layout, CheckBasis basis);

struct GhzPartition {
    u32 l = 0;                    // GHZ ancilla count
    CheckBasis basis = CheckBasis::YTransversal;
    std::vector<CheckSite> sites;
    std::vector<u32> assignment;  // site index -> ancilla in [0, l)
    bool has_flag = false;        // GHZ(5) fault-tolerant prep uses a flag qubit

    std::vector<bool> part_support(size_t n_data, u32 part) const;
    std::vector<u32> sites_of(u32 part) const;
};

// Exact validation: no union of floor(f/2) parts may support any logical
// operator of the code (checked by GF(2) rank, all representatives of all
// weights).
bool validate_partition(const CodeLayout &layout, const GhzPartition &p, int f);

// The spec'd weaker check used as a cross-oracle in tests: only minimum-weight
// X/Z representatives (weight <= d+2), enumerated exhaustively (d <= 5).
bool validate_partition_minweight(const CodeLayout &layout, const GhzPartition &p, int f);

// Deterministic greedy construction with backtracking; balanced within +-1.
GhzPartition build_partition(const CodeLayout &layout, CheckBasis basis, u32 l, int f);

std::string partition_to_json(const GhzPartition &p);

}  // namespace cultiv
