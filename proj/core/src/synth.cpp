#include "cultivator/synth.hpp"

#include <algorithm>

namespace cultiv {

Circuit css_encoder(const CodeLayout &layout, u32 input_qubit) {
    size_t n = layout.n();
    require(layout.logical_x.x(input_qubit), "input qubit must lie on the logical X string");

    // rows: logical X first, then the X stabilizers, as data-qubit bit sets
    std::vector<std::vector<u64>> rows;
    auto to_row = [&](const PauliString &p) {
        std::vector<u64> row(word_count(n));
        for (u32 q = 0; q < n; q++)
            if (p.x(q)) set_bit(row, q, true);
        return row;
    };
    rows.push_back(to_row(layout.logical_x));
    for (const auto &s : layout.x_stabs) rows.push_back(to_row(layout.stab_pauli(s)));

    // Reduced echelon form of the stabilizer rows (never using the input
    // column as a pivot, and never mixing the logical row into them), then
    // clear stabilizer pivots out of the logical row.  Stabilizer fans may
    // target the input qubit; the input fan is emitted first.
    std::vector<u32> pivot(rows.size());
    pivot[0] = input_qubit;
    std::vector<bool> used(n, false);
    used[input_qubit] = true;
    for (size_t r = 1; r < rows.size(); r++) {
        size_t p = n;
        for (u32 q = 0; q < n; q++)
            if (!used[q] && get_bit(rows[r], q)) { p = q; break; }
        require(p < n, "X stabilizers not independent");
        pivot[r] = u32(p);
        used[p] = true;
        for (size_t r2 = 0; r2 < rows.size(); r2++)
            if (r2 != r && r2 != 0 && get_bit(rows[r2], pivot[r])) xor_into(rows[r2], rows[r]);
    }
    for (size_t r = 1; r < rows.size(); r++)
        if (get_bit(rows[0], pivot[r])) xor_into(rows[0], rows[r]);

    Circuit c;
    c.n_qubits = n;
    // H on stabilizer pivots
    Instruction h{Op::H, {}, 0, "", false, -1};
    for (size_t r = 1; r < rows.size(); r++) h.targets.push_back(Target::qubit(pivot[r]));
    std::sort(h.targets.begin(), h.targets.end(),
              [](const Target &a, const Target &b) { return a.value < b.value; });
    c.append(h);
    c.append({Op::TICK, {}, 0, "", false, -1});

    // CX fans, packed greedily into layers
    std::vector<std::pair<u32, u32>> cxs;
    for (size_t r = 0; r < rows.size(); r++)
        for (u32 q = 0; q < n; q++)
            if (q != pivot[r] && get_bit(rows[r], q)) cxs.push_back({pivot[r], q});
    while (!cxs.empty()) {
        std::vector<bool> busy(n, false);
        Instruction layer{Op::CX, {}, 0, "", false, -1};
        std::vector<std::pair<u32, u32>> rest;
        for (auto [a, b] : cxs) {
            if (!busy[a] && !busy[b]) {
                busy[a] = busy[b] = true;
                layer.targets.push_back(Target::qubit(a));
                layer.targets.push_back(Target::qubit(b));
            } else {
                // keep both endpoints busy so non-commuting gates stay ordered
                busy[a] = busy[b] = true;
                rest.push_back({a, b});
            }
        }
        c.append(layer);
        cxs = std::move(rest);
        if (!cxs.empty()) c.append({Op::TICK, {}, 0, "", false, -1});
    }
    return c;
}

}  // namespace cultiv
