#include "cultivator/partition.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace cultiv {

std::vector<CheckSite> check_sites(const CodeLayout &layout, CheckBasis basis) {
    std::vector<CheckSite> sites;
    if (basis == CheckBasis::HxyFold) {
        require(layout.family == Family::Reg, "fold check needs a Reg layout");
        for (u32 q : layout.diagonal) sites.push_back({{q}});
        for (u32 q : layout.below_diagonal) sites.push_back({{q, layout.tau[q]}});
    } else {
        // transversal Y on the (even, even) sublattice
        require(layout.family == Family::Reg, "Y check sites defined on Reg layout");
        for (u32 q = 0; q < layout.n(); q++) {
            Coord p = layout.data[q];
            if (p.r % 2 == 0 && p.c % 2 == 0) sites.push_back({{q}});
        }
    }
    return sites;
}

std::vector<bool> GhzPartition::part_support(size_t n_data, u32 part) const {
    std::vector<bool> sup(n_data, false);
    for (size_t i = 0; i < sites.size(); i++)
        if (assignment[i] == part)
            for (u32 q : sites[i].qubits) sup[q] = true;
    return sup;
}

std::vector<u32> GhzPartition::sites_of(u32 part) const {
    std::vector<u32> out;
    for (size_t i = 0; i < sites.size(); i++)
        if (assignment[i] == part) out.push_back(u32(i));
    return out;
}

namespace {

bool unions_clear(const CodeLayout &layout, const GhzPartition &p, int f,
                  bool (*check)(const CodeLayout &, const std::vector<bool> &,
                                const GhzPartition &)) {
    int k = f / 2;
    if (k == 0) return true;
    std::vector<u32> combo(k);
    // iterate k-combinations of parts
    std::vector<u32> idx(k);
    for (int i = 0; i < k; i++) idx[i] = u32(i);
    while (true) {
        std::vector<bool> sup(layout.n(), false);
        for (int i = 0; i < k; i++) {
            auto s = p.part_support(layout.n(), idx[i]);
            for (size_t q = 0; q < s.size(); q++)
                if (s[q]) sup[q] = true;
        }
        if (!check(layout, sup, p)) return false;
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == p.l - u32(k - pos)) pos--;
        if (pos < 0) break;
        idx[pos]++;
        for (int i = pos + 1; i < k; i++) idx[i] = idx[i - 1] + 1;
    }
    return true;
}

bool rank_clear(const CodeLayout &layout, const std::vector<bool> &sup, const GhzPartition &) {
    return !subset_supports_logical(layout, sup);
}

}  // namespace

bool validate_partition(const CodeLayout &layout, const GhzPartition &p, int f) {
    require(p.assignment.size() == p.sites.size(), "partition assignment incomplete");
    return unions_clear(layout, p, f, rank_clear);
}

bool validate_partition_minweight(const CodeLayout &layout, const GhzPartition &p, int f) {
    int k = f / 2;
    if (k == 0) return true;
    size_t bound = size_t(layout.d) + 2;
    auto reps_x = low_weight_logicals(layout, 'X', bound);
    auto reps_z = low_weight_logicals(layout, 'Z', bound);
    std::vector<std::vector<bool>> supports;
    for (u32 part = 0; part < p.l; part++) supports.push_back(p.part_support(layout.n(), part));

    std::vector<u32> idx(k);
    for (int i = 0; i < k; i++) idx[i] = u32(i);
    while (true) {
        std::vector<bool> sup(layout.n(), false);
        for (int i = 0; i < k; i++)
            for (size_t q = 0; q < sup.size(); q++)
                if (supports[idx[i]][q]) sup[q] = true;
        for (const auto *reps : {&reps_x, &reps_z})
            for (const auto &rep : *reps) {
                bool inside = true;
                for (u32 q = 0; q < layout.n() && inside; q++)
                    if ((rep.x(q) || rep.z(q)) && !sup[q]) inside = false;
                if (inside) return false;
            }
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == p.l - u32(k - pos)) pos--;
        if (pos < 0) break;
        idx[pos]++;
        for (int i = pos + 1; i < k; i++) idx[i] = idx[i - 1] + 1;
    }
    return true;
}

GhzPartition build_partition(const CodeLayout &layout, CheckBasis basis, u32 l, int f) {
    require(f == 1 || f == 3 || f == 5, "fault distance must be 1, 3 or 5");
    require(l >= u32(f > 1 ? f : 1), "GHZ size must be at least the fault distance");
    GhzPartition p;
    p.l = l;
    p.basis = basis;
    p.sites = check_sites(layout, basis);
    p.has_flag = l >= 5;
    size_t ns = p.sites.size();
    p.assignment.assign(ns, 0);

    size_t cap = (ns + l - 1) / l;  // balanced within +-1
    std::vector<u32> load(l, 0);

    // Deterministic DFS. Sites are assigned in index order; a partial
    // assignment is pruned as soon as one part alone already supports a
    // logical (sufficient for the f=3 condition, a cheap filter for f=5).
    std::vector<u32> order(ns);
    for (size_t i = 0; i < ns; i++) order[i] = u32(i);

    std::vector<u32> chosen(ns, l);
    auto part_ok = [&](u32 part) {
        std::vector<bool> sup(layout.n(), false);
        for (size_t i = 0; i < ns; i++)
            if (chosen[i] == part)
                for (u32 q : p.sites[i].qubits) sup[q] = true;
        return !subset_supports_logical(layout, sup);
    };

    size_t steps = 0;
    std::function<bool(size_t)> dfs = [&](size_t pos) -> bool {
        if (++steps > 2000000) return false;
        if (pos == ns) {
            p.assignment = chosen;
            return validate_partition(layout, p, f);
        }
        // try parts from least loaded, ties by index
        std::vector<u32> parts(l);
        for (u32 i = 0; i < l; i++) parts[i] = i;
        std::stable_sort(parts.begin(), parts.end(),
                         [&](u32 a, u32 b) { return load[a] < load[b]; });
        for (u32 part : parts) {
            if (load[part] >= cap) continue;
            chosen[order[pos]] = part;
            load[part]++;
            if (part_ok(part) && dfs(pos + 1)) return true;
            load[part]--;
            chosen[order[pos]] = l;
        }
        return false;
    };
    require(dfs(0), "no valid GHZ partition found");
    return p;
}

std::string partition_to_json(const GhzPartition &p) {
    std::ostringstream o;
    o << "{\n  \"l\": " << p.l << ",\n  \"flag\": " << (p.has_flag ? "true" : "false")
      << ",\n  \"sites\": [";
    for (size_t i = 0; i < p.sites.size(); i++) {
        o << (i ? ", " : "") << "{\"qubits\": [";
        for (size_t k = 0; k < p.sites[i].qubits.size(); k++)
            o << (k ? ", " : "") << p.sites[i].qubits[k];
        o << "], \"ancilla\": " << p.assignment[i] << "}";
    }
    o << "]\n}\n";
    return o.str();
}

}  // namespace cultiv
