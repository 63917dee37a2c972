#include "doctest.h"

#include <algorithm>

#include "cultivator/layout.hpp"
#include "cultivator/partition.hpp"
#include "cultivator/tableau.hpp"

using namespace cultiv;

static void check_layout_valid(const CodeLayout &L) {
    auto stabs = L.all_stab_paulis();
    for (size_t i = 0; i < stabs.size(); i++)
        for (size_t j = i + 1; j < stabs.size(); j++)
            CHECK(stabs[i].commutes_with(stabs[j]));
    for (const auto &s : stabs) {
        CHECK(s.commutes_with(L.logical_x));
        CHECK(s.commutes_with(L.logical_z));
    }
    CHECK(!L.logical_x.commutes_with(L.logical_z));
}

TEST_CASE("layout counts") {
    auto reg3 = build_layout(Family::Reg, 3);
    CHECK(reg3.n() == 13);
    CHECK(reg3.x_stabs.size() == 6);
    CHECK(reg3.z_stabs.size() == 6);
    auto reg5 = build_layout(Family::Reg, 5);
    CHECK(reg5.n() == 41);
    auto rot3 = build_layout(Family::Rot, 3);
    CHECK(rot3.n() == 9);
    CHECK(rot3.x_stabs.size() + rot3.z_stabs.size() == 8);
    auto rot5 = build_layout(Family::Rot, 5);
    CHECK(rot5.n() == 25);
    CHECK(rot5.x_stabs.size() + rot5.z_stabs.size() == 24);
    CHECK_THROWS_AS(build_layout(Family::Reg, 4), Error);
    CHECK_THROWS_AS(build_layout(Family::Rot, 1), Error);

    for (auto fam : {Family::Rot, Family::Reg})
        for (int d : {3, 5, 7}) check_layout_valid(build_layout(fam, d));
}

TEST_CASE("fold data") {
    auto reg3 = build_layout(Family::Reg, 3);
    auto f3 = fold_data(reg3);
    CHECK(f3.diagonal.size() == 5);
    CHECK(f3.pairs.size() == 4);
    auto reg5 = build_layout(Family::Reg, 5);
    auto f5 = fold_data(reg5);
    CHECK(f5.diagonal.size() == 9);
    CHECK(f5.pairs.size() == 16);
    for (int d : {3, 5, 7, 9}) {
        auto L = build_layout(Family::Reg, d);
        auto f = fold_data(L);
        CHECK(f.diagonal.size() == size_t(2 * d - 1));
        CHECK(f.pairs.size() == size_t((d - 1) * (d - 1)));
        // tau is an involution fixing exactly the diagonal
        size_t fixed = 0;
        for (u32 q = 0; q < L.n(); q++) {
            CHECK(L.tau[L.tau[q]] == q);
            if (L.tau[q] == q) fixed++;
        }
        CHECK(fixed == size_t(2 * d - 1));
    }
    CHECK_THROWS_AS(fold_data(build_layout(Family::Rot, 3)), Error);
}

TEST_CASE("fold X identity: boundary logical X times diagonal X is a stabilizer product") {
    for (int d : {3, 5}) {
        auto L = build_layout(Family::Reg, d);
        PauliString p = L.logical_x;
        for (u32 q : L.diagonal) p.set_x(q, !p.x(q));
        std::vector<PauliString> xgens;
        for (const auto &s : L.x_stabs) xgens.push_back(L.stab_pauli(s));
        int ph = 0;
        CHECK(in_group_mod_phase(p, xgens, &ph));
    }
}

TEST_CASE("destabilizer for syndrome") {
    auto L = build_layout(Family::Reg, 3);
    size_t ns = L.z_stabs.size() + L.x_stabs.size();
    // trivial syndrome -> identity
    CHECK(destabilizer_for_syndrome(L, std::vector<bool>(ns, false)).weight() == 0);
    // single flagged Z stabilizer adjacent to the bottom boundary -> weight-1 X
    for (size_t i = 0; i < L.z_stabs.size(); i++) {
        if (L.z_stabs[i].site.r == 2 * L.d - 3) {
            std::vector<bool> s(ns, false);
            s[i] = true;
            auto D = destabilizer_for_syndrome(L, s);
            CHECK(D.weight() == 1);
        }
    }
    // anticommutation pattern holds for every syndrome (exhaustive for d=3)
    auto stabs = L.all_stab_paulis();  // X first, then Z
    std::vector<PauliString> ordered;
    for (const auto &st : L.z_stabs) ordered.push_back(L.stab_pauli(st));
    for (const auto &st : L.x_stabs) ordered.push_back(L.stab_pauli(st));
    for (size_t mask = 0; mask < (size_t(1) << ns); mask += 7) {
        std::vector<bool> s(ns);
        for (size_t i = 0; i < ns; i++) s[i] = (mask >> i) & 1;
        auto D = destabilizer_for_syndrome(L, s);
        for (size_t i = 0; i < ns; i++)
            CHECK(D.commutes_with(ordered[i]) == !s[i]);
    }
}

TEST_CASE("subset_supports_logical") {
    auto L = build_layout(Family::Reg, 3);
    std::vector<bool> all(L.n(), true);
    CHECK(subset_supports_logical(L, all));
    std::vector<bool> none(L.n(), false);
    CHECK(!subset_supports_logical(L, none));
    // the left boundary column supports logical X
    std::vector<bool> col(L.n(), false);
    for (int i = 0; i < 3; i++) col[L.data_index.at({2 * i, 0})] = true;
    CHECK(subset_supports_logical(L, col));
    // two qubits of it do not
    col[L.data_index.at({4, 0})] = false;
    CHECK(!subset_supports_logical(L, col));
}

TEST_CASE("partitions: build and validate") {
    auto reg3 = build_layout(Family::Reg, 3);
    auto sites_h = check_sites(reg3, CheckBasis::HxyFold);
    CHECK(sites_h.size() == 9);  // 5 diagonal + 4 mirrored pairs

    auto p = build_partition(reg3, CheckBasis::HxyFold, 3, 3);
    CHECK(validate_partition(reg3, p, 3));
    CHECK(validate_partition_minweight(reg3, p, 3));
    // balanced within +-1
    std::vector<int> load(3, 0);
    for (u32 a : p.assignment) load[a]++;
    CHECK(*std::max_element(load.begin(), load.end()) -
          *std::min_element(load.begin(), load.end()) <= 1);

    auto py = build_partition(reg3, CheckBasis::YTransversal, 3, 3);
    CHECK(py.sites.size() == 9);
    CHECK(validate_partition(reg3, py, 3));

    // a single ancilla holding everything is invalid at f=3
    GhzPartition bad;
    bad.l = 1;
    bad.basis = CheckBasis::HxyFold;
    bad.sites = sites_h;
    bad.assignment.assign(bad.sites.size(), 0);
    CHECK(!validate_partition(reg3, bad, 3));
    CHECK_THROWS_AS(build_partition(reg3, CheckBasis::HxyFold, 1, 3), Error);
    // any assignment is fine at f=1 (zero combinations to check)
    CHECK(validate_partition(reg3, bad, 1));

    // placing one full row of the transversal-Y support in one part is invalid
    GhzPartition rows;
    rows.l = 3;
    rows.basis = CheckBasis::YTransversal;
    rows.sites = check_sites(reg3, CheckBasis::YTransversal);
    rows.assignment.resize(rows.sites.size());
    for (size_t i = 0; i < rows.sites.size(); i++) {
        Coord pc = reg3.data[rows.sites[i].qubits[0]];
        rows.assignment[i] = u32(pc.r / 2);  // whole rows share an ancilla
    }
    CHECK(!validate_partition(reg3, rows, 3));
    CHECK(!validate_partition_minweight(reg3, rows, 3));
}

TEST_CASE("partitions: f=5 on Reg(5)") {
    auto reg5 = build_layout(Family::Reg, 5);
    auto p = build_partition(reg5, CheckBasis::HxyFold, 5, 5);
    CHECK(p.sites.size() == 25);  // 9 diagonal + 16 pairs
    CHECK(p.has_flag);
    CHECK(validate_partition(reg5, p, 5));
    CHECK(validate_partition_minweight(reg5, p, 5));

    auto py = build_partition(reg5, CheckBasis::YTransversal, 5, 5);
    CHECK(py.sites.size() == 25);
    CHECK(validate_partition(reg5, py, 5));
}

TEST_CASE("layout json serializes") {
    auto L = build_layout(Family::Reg, 3);
    std::string js = layout_to_json(L);
    CHECK(js.find("\"family\": \"Reg\"") != std::string::npos);
    CHECK(partition_to_json(build_partition(L, CheckBasis::HxyFold, 3, 3)).find("ancilla") !=
          std::string::npos);
}
