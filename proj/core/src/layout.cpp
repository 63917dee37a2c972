#include "cultivator/layout.hpp"

#include <algorithm>
#include <sstream>

namespace cultiv {

PauliString CodeLayout::stab_pauli(const Stabilizer &s) const {
    PauliString p(n());
    for (u32 q : s.support) {
        if (s.basis == 'X') p.set_x(q, true);
        else p.set_z(q, true);
    }
    return p;
}

std::vector<PauliString> CodeLayout::all_stab_paulis() const {
    std::vector<PauliString> out;
    for (const auto &s : x_stabs) out.push_back(stab_pauli(s));
    for (const auto &s : z_stabs) out.push_back(stab_pauli(s));
    return out;
}

const Stabilizer *CodeLayout::stab_at(Coord site) const {
    for (const auto &s : x_stabs)
        if (s.site == site) return &s;
    for (const auto &s : z_stabs)
        if (s.site == site) return &s;
    return nullptr;
}

namespace {

CodeLayout build_rot(int d, int checker = 0) {
    CodeLayout L;
    L.family = Family::Rot;
    L.d = d;
    for (int i = 0; i < d; i++)
        for (int j = 0; j < d; j++) {
            L.data_index[{2 * i, 2 * j}] = u32(L.data.size());
            L.data.push_back({2 * i, 2 * j});
        }
    auto add_plaq = [&](Coord site) {
        char basis = ((site.r + site.c + checker) % 4 + 4) % 4 == 2 ? 'X' : 'Z';
        Stabilizer s{site, basis, {}};
        for (int dr : {-1, 1})
            for (int dc : {-1, 1}) {
                auto it = L.data_index.find({site.r + dr, site.c + dc});
                if (it != L.data_index.end()) s.support.push_back(it->second);
            }
        std::sort(s.support.begin(), s.support.end());
        (basis == 'X' ? L.x_stabs : L.z_stabs).push_back(s);
    };
    for (int r = 1; r <= 2 * d - 3; r += 2)
        for (int c = 1; c <= 2 * d - 3; c += 2) add_plaq({r, c});
    // boundary half-plaquettes: X along top/bottom, Z along left/right
    for (int c = 1; c <= 2 * d - 3; c += 2) {
        if (((-1 + c + checker) % 4 + 4) % 4 == 2) add_plaq({-1, c});
        if (((2 * d - 1 + c + checker) % 4 + 4) % 4 == 2) add_plaq({2 * d - 1, c});
    }
    for (int r = 1; r <= 2 * d - 3; r += 2) {
        if (((r - 1 + checker) % 4 + 4) % 4 == 0) add_plaq({r, -1});
        if (((r + 2 * d - 1 + checker) % 4 + 4) % 4 == 0) add_plaq({r, 2 * d - 1});
    }
    L.logical_x = PauliString(L.n());
    L.logical_z = PauliString(L.n());
    for (int i = 0; i < d; i++) {
        L.logical_x.set_x(L.data_index.at({2 * i, 0}), true);
        L.logical_z.set_z(L.data_index.at({0, 2 * i}), true);
    }
    return L;
}

CodeLayout build_reg(int d) {
    CodeLayout L;
    L.family = Family::Reg;
    L.d = d;
    int w = 2 * d - 1;
    for (int r = 0; r < w; r++)
        for (int c = 0; c < w; c++)
            if ((r + c) % 2 == 0) {
                L.data_index[{r, c}] = u32(L.data.size());
                L.data.push_back({r, c});
            }
    auto add_check = [&](Coord site, char basis) {
        Stabilizer s{site, basis, {}};
        const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; k++) {
            auto it = L.data_index.find({site.r + dr[k], site.c + dc[k]});
            if (it != L.data_index.end()) s.support.push_back(it->second);
        }
        std::sort(s.support.begin(), s.support.end());
        (basis == 'X' ? L.x_stabs : L.z_stabs).push_back(s);
    };
    for (int r = 0; r < w; r++)
        for (int c = 0; c < w; c++) {
            if (r % 2 == 0 && c % 2 == 1) add_check({r, c}, 'X');
            if (r % 2 == 1 && c % 2 == 0) add_check({r, c}, 'Z');
        }
    L.logical_x = PauliString(L.n());
    L.logical_z = PauliString(L.n());
    for (int i = 0; i < d; i++) {
        L.logical_x.set_x(L.data_index.at({2 * i, 0}), true);  // left boundary
        L.logical_z.set_z(L.data_index.at({0, 2 * i}), true);  // top boundary
    }
    for (int i = 0; i < w; i++) L.diagonal.push_back(L.data_index.at({i, i}));
    L.tau.resize(L.n());
    for (u32 q = 0; q < L.n(); q++) {
        Coord p = L.data[q];
        L.tau[q] = L.data_index.at({p.c, p.r});
        if (p.r > p.c) L.below_diagonal.push_back(q);
    }
    return L;
}

}  // namespace

CodeLayout build_layout(Family family, int d) {
    require(d >= 3 && d % 2 == 1, "code distance must be odd and >= 3");
    return family == Family::Rot ? build_rot(d) : build_reg(d);
}

CodeLayout build_rot_flipped(int d) {
    require(d >= 3 && d % 2 == 1, "code distance must be odd and >= 3");
    return build_rot(d, 2);
}

FoldData fold_data(const CodeLayout &layout) {
    require(layout.family == Family::Reg, "fold is defined for Reg layouts only");
    FoldData f;
    f.diagonal = layout.diagonal;
    for (u32 q : layout.below_diagonal) f.pairs.push_back({q, layout.tau[q]});
    return f;
}

PauliString destabilizer_for_syndrome(const CodeLayout &layout, const std::vector<bool> &s) {
    require(layout.family == Family::Reg, "destabilizer construction assumes Reg frame");
    require(s.size() == layout.z_stabs.size() + layout.x_stabs.size(),
            "syndrome length mismatch");
    PauliString D = PauliString::identity(layout.n());
    int w = 2 * layout.d - 1;
    for (size_t i = 0; i < layout.z_stabs.size(); i++) {
        if (!s[i]) continue;
        Coord site = layout.z_stabs[i].site;  // (odd, even): X string to bottom
        for (int r = site.r + 1; r <= w - 1; r += 2) {
            u32 q = layout.data_index.at({r, site.c});
            D.set_x(q, !D.x(q));
        }
    }
    for (size_t i = 0; i < layout.x_stabs.size(); i++) {
        if (!s[layout.z_stabs.size() + i]) continue;
        Coord site = layout.x_stabs[i].site;  // (even, odd): Z string to right
        for (int c = site.c + 1; c <= w - 1; c += 2) {
            u32 q = layout.data_index.at({site.r, c});
            D.set_z(q, !D.z(q));
        }
    }
    return D;
}

bool subset_supports_logical(const CodeLayout &layout, const std::vector<bool> &support) {
    size_t n = layout.n();
    std::vector<PauliString> stabs = layout.all_stab_paulis();

    // dim of centralizer elements supported on the subset
    std::vector<u32> cols;  // symplectic coordinates allowed to be nonzero
    for (u32 q = 0; q < n; q++)
        if (support[q]) { cols.push_back(q); cols.push_back(u32(n + q)); }
    size_t k = cols.size();
    std::vector<std::vector<u64>> M;
    for (const auto &st : stabs) {
        std::vector<u64> row(word_count(std::max<size_t>(k, 1)));
        for (size_t j = 0; j < k; j++) {
            u32 coord = cols[j];
            bool pair = coord < n ? st.z(coord) : st.x(coord - n);
            if (pair) set_bit(row, j, true);
        }
        M.push_back(std::move(row));
    }
    size_t rankM = 0;
    for (size_t col = 0; col < k; col++) {
        size_t piv = rankM;
        while (piv < M.size() && !get_bit(M[piv], col)) piv++;
        if (piv == M.size()) continue;
        std::swap(M[piv], M[rankM]);
        for (size_t r = 0; r < M.size(); r++)
            if (r != rankM && get_bit(M[r], col)) xor_into(M[r], M[rankM]);
        rankM++;
        if (rankM == M.size()) break;
    }
    size_t dim_centralizer = k - rankM;

    // dim of stabilizer-group elements supported on the subset
    size_t m2 = 2 * n;
    auto encode = [&](const PauliString &p) {
        std::vector<u64> row(word_count(m2));
        for (u32 q = 0; q < n; q++) {
            if (p.x(q)) set_bit(row, q, true);
            if (p.z(q)) set_bit(row, n + q, true);
        }
        return row;
    };
    std::vector<bool> in_u(m2, false);
    for (u32 q = 0; q < n; q++)
        if (support[q]) in_u[q] = in_u[n + q] = true;
    auto rank_of = [&](bool zero_inside) {
        std::vector<std::vector<u64>> rows;
        for (const auto &st : stabs) {
            auto r = encode(st);
            if (zero_inside)
                for (size_t j = 0; j < m2; j++)
                    if (in_u[j]) set_bit(r, j, false);
            rows.push_back(std::move(r));
        }
        size_t rank = 0;
        for (size_t col = 0; col < m2 && rank < rows.size(); col++) {
            size_t piv = rank;
            while (piv < rows.size() && !get_bit(rows[piv], col)) piv++;
            if (piv == rows.size()) continue;
            std::swap(rows[piv], rows[rank]);
            for (size_t r2 = 0; r2 < rows.size(); r2++)
                if (r2 != rank && get_bit(rows[r2], col)) xor_into(rows[r2], rows[rank]);
            rank++;
        }
        return rank;
    };
    size_t dim_stab_in_u = rank_of(false) - rank_of(true);
    return dim_centralizer > dim_stab_in_u;
}

std::vector<PauliString> low_weight_logicals(const CodeLayout &layout, char basis,
                                             size_t max_weight) {
    const auto &stabs = basis == 'X' ? layout.x_stabs : layout.z_stabs;
    require(stabs.size() <= 24, "low_weight_logicals: exhaustive closure too large");
    PauliString rep = basis == 'X' ? layout.logical_x : layout.logical_z;
    std::vector<PauliString> gens;
    for (const auto &s : stabs) gens.push_back(layout.stab_pauli(s));
    std::vector<PauliString> out;
    size_t count = size_t(1) << gens.size();
    for (size_t mask = 0; mask < count; mask++) {
        PauliString p = rep;
        for (size_t i = 0; i < gens.size(); i++)
            if ((mask >> i) & 1) p *= gens[i];
        if (p.weight() <= max_weight) out.push_back(p);
    }
    return out;
}

std::string layout_to_json(const CodeLayout &layout) {
    std::ostringstream o;
    o << "{\n  \"family\": \"" << (layout.family == Family::Rot ? "Rot" : "Reg")
      << "\",\n  \"d\": " << layout.d << ",\n  \"data\": [";
    for (size_t i = 0; i < layout.data.size(); i++)
        o << (i ? ", " : "") << "[" << layout.data[i].r << ", " << layout.data[i].c << "]";
    o << "],\n  \"stabilizers\": [";
    bool first = true;
    for (const auto *group : {&layout.x_stabs, &layout.z_stabs})
        for (const auto &s : *group) {
            o << (first ? "" : ", ") << "{\"basis\": \"" << s.basis << "\", \"site\": ["
              << s.site.r << ", " << s.site.c << "], \"support\": [";
            for (size_t i = 0; i < s.support.size(); i++)
                o << (i ? ", " : "") << s.support[i];
            o << "]}";
            first = false;
        }
    o << "],\n  \"logical_x\": \"" << layout.logical_x.text() << "\",\n  \"logical_z\": \""
      << layout.logical_z.text() << "\"\n}\n";
    return o.str();
}

}  // namespace cultiv
