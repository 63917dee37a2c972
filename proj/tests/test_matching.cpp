#include "doctest.h"

#include <algorithm>
#include <functional>

#include "cultivator/matching.hpp"
#include "cultivator/rng.hpp"

using namespace cultiv;

// ---- oracles ---------------------------------------------------------------

// exhaustive enumeration of perfect matchings on a weight matrix
static i64 enumerate_pm(size_t n, const std::vector<i64> &w) {
    std::vector<u32> nodes(n);
    for (size_t i = 0; i < n; i++) nodes[i] = u32(i);
    std::function<i64(std::vector<u32> &)> rec = [&](std::vector<u32> &left) -> i64 {
        if (left.empty()) return 0;
        u32 a = left[0];
        i64 best = kNoEdge;
        for (size_t j = 1; j < left.size(); j++) {
            u32 b = left[j];
            if (w[a * n + b] >= kNoEdge) continue;
            std::vector<u32> rest;
            for (size_t k = 1; k < left.size(); k++)
                if (k != j) rest.push_back(left[k]);
            i64 sub = rec(rest);
            if (sub < kNoEdge) best = std::min(best, w[a * n + b] + sub);
        }
        return best;
    };
    return rec(nodes);
}

TEST_CASE("blossom matches enumeration on random dense graphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 600; trial++) {
        size_t n = 2 * (1 + rng.below(5));  // 2..10 nodes
        std::vector<i64> w(n * n, kNoEdge);
        for (size_t i = 0; i < n; i++)
            for (size_t j = i + 1; j < n; j++) {
                if (rng.below(100) < 85) {
                    i64 v = i64(rng.below(1000));
                    w[i * n + j] = w[j * n + i] = v;
                }
            }
        std::vector<int> mate;
        i64 got = min_weight_perfect_matching(n, w, mate);
        i64 expect = enumerate_pm(n, w);
        CHECK(got == expect);
        if (got < kNoEdge) {
            i64 sum = 0;
            for (size_t v = 0; v < n; v++) {
                REQUIRE(mate[v] >= 0);
                CHECK(mate[size_t(mate[v])] == int(v));
                if (size_t(mate[v]) > v) sum += w[v * n + size_t(mate[v])];
            }
            CHECK(sum == got);
        }
    }
}

TEST_CASE("blossom on larger graphs vs subset DP") {
    // DP over subsets as an independent oracle, up to 16 nodes
    Rng rng(555);
    for (int trial = 0; trial < 60; trial++) {
        size_t n = 12 + 2 * rng.below(3);  // 12..16
        std::vector<i64> w(n * n, kNoEdge);
        for (size_t i = 0; i < n; i++)
            for (size_t j = i + 1; j < n; j++)
                if (rng.below(100) < 90)
                    w[i * n + j] = w[j * n + i] = i64(rng.below(5000));
        std::vector<i64> dp(size_t(1) << n, kNoEdge);
        dp[0] = 0;
        for (size_t mask = 1; mask < dp.size(); mask++) {
            size_t a = size_t(__builtin_ctzll(mask));
            if (!((mask >> a) & 1)) continue;
            for (size_t b = a + 1; b < n; b++) {
                if (!((mask >> b) & 1) || w[a * n + b] >= kNoEdge) continue;
                size_t rest = mask & ~((size_t(1) << a) | (size_t(1) << b));
                if (dp[rest] < kNoEdge)
                    dp[mask] = std::min(dp[mask], dp[rest] + w[a * n + b]);
            }
        }
        std::vector<int> mate;
        i64 got = min_weight_perfect_matching(n, w, mate);
        CHECK(got == dp.back());
    }
}

TEST_CASE("blossom on structured graphs that need odd cycles") {
    size_t n = 4;
    std::vector<i64> w(16, kNoEdge);
    auto set = [&](size_t a, size_t b, i64 v) { w[a * n + b] = w[b * n + a] = v; };
    set(0, 1, 1);
    set(1, 2, 1);
    set(0, 2, 1);
    set(2, 3, 10);
    set(0, 3, 100);
    std::vector<int> mate;
    CHECK(min_weight_perfect_matching(n, w, mate) == 11);  // (0,1) + (2,3)
}

TEST_CASE("no perfect matching reported") {
    size_t n = 4;
    std::vector<i64> w(16, kNoEdge);
    w[0 * n + 1] = w[1 * n + 0] = 3;  // 2 and 3 isolated
    std::vector<int> mate;
    CHECK(min_weight_perfect_matching(n, w, mate) == kNoEdge);
}

// ---- decoding on synthetic DEMs --------------------------------------------

static DetectorErrorModel make_dem(size_t n_det,
                                   std::vector<std::tuple<double, std::vector<u32>, u32>> ms) {
    DetectorErrorModel dem;
    dem.n_detectors = n_det;
    dem.n_observables = 1;
    for (auto &[p, dets, obs] : ms) {
        std::sort(dets.begin(), dets.end());
        dem.mechanisms.push_back({p, dets, obs});
    }
    std::sort(dem.mechanisms.begin(), dem.mechanisms.end());
    return dem;
}

TEST_CASE("decode: empty syndrome, boundary defect, gap structure") {
    // 1D chain: D0 - D1 - D2, boundaries at both ends, observable crossing
    // at the left boundary edge.
    auto dem = make_dem(3, {
        {0.01, {0}, 1},      // left boundary edge, crosses the logical
        {0.01, {0, 1}, 0},
        {0.01, {1, 2}, 0},
        {0.01, {2}, 0},      // right boundary edge
    });
    auto g = MatchingGraph::build(dem);
    auto r0 = g.decode({});
    CHECK(r0.w_best == 0);
    CHECK(r0.obs_pred == 0);
    CHECK(r0.gap_db > 0);
    CHECK(r0.w_comp == g.d(0, g.logical_node) + g.d(0, g.boundary_node));

    auto r1 = g.decode({2});
    CHECK(r1.w_best == g.d(2, g.boundary_node));
    CHECK(r1.obs_pred == 0);

    auto r2 = g.decode({0});
    CHECK(r2.w_best == g.d(0, g.logical_node));
    CHECK(r2.obs_pred == 1);
}

TEST_CASE("decode: gap symmetry under observable complement") {
    auto dem_a = make_dem(2, {{0.02, {0}, 1}, {0.05, {0, 1}, 0}, {0.03, {1}, 0}});
    auto dem_b = make_dem(2, {{0.02, {0}, 0}, {0.05, {0, 1}, 0}, {0.03, {1}, 1}});
    auto ga = MatchingGraph::build(dem_a);
    auto gb = MatchingGraph::build(dem_b);
    for (std::vector<u32> syn : {std::vector<u32>{}, {0}, {1}, {0, 1}}) {
        auto ra = ga.decode(syn);
        auto rb = gb.decode(syn);
        CHECK(ra.gap_db == doctest::Approx(rb.gap_db).epsilon(1e-9));
        CHECK(ra.w_best == rb.w_best);
    }
}

TEST_CASE("decode agrees with exhaustive class-constrained enumeration") {
    Rng rng(77);
    int checked = 0;
    for (int trial = 0; trial < 500; trial++) {
        size_t nd = 2 + rng.below(11);  // up to 12 detectors
        std::vector<std::tuple<double, std::vector<u32>, u32>> ms;
        for (u32 d = 0; d + 1 < nd; d++)
            ms.push_back({0.001 + 0.3 * rng.uniform(), {d, d + 1}, 0});
        ms.push_back({0.001 + 0.3 * rng.uniform(), {0}, u32(1)});
        ms.push_back({0.001 + 0.3 * rng.uniform(), {u32(nd - 1)}, 0});
        size_t extra = rng.below(nd);
        for (size_t e = 0; e < extra; e++) {
            u32 a = u32(rng.below(nd)), b = u32(rng.below(nd));
            if (a == b) continue;
            ms.push_back({0.001 + 0.3 * rng.uniform(), {std::min(a, b), std::max(a, b)}, 0});
        }
        auto dem = make_dem(nd, ms);
        auto g = MatchingGraph::build(dem);

        std::vector<u32> syn;
        for (u32 d = 0; d < nd; d++)
            if (rng.below(3) == 0) syn.push_back(d);
        if (syn.size() > 6) continue;
        auto res = g.decode(syn);

        auto oracle_class = [&](bool odd) -> i64 {
            std::vector<u32> T = syn;
            if (odd) T.push_back(g.logical_node);
            size_t k = T.size();
            size_t n = 2 * k;
            if (k == 0) return 0;
            std::vector<i64> w(n * n, kNoEdge);
            for (size_t i = 0; i < k; i++) {
                for (size_t j = i + 1; j < k; j++) w[i * n + j] = w[j * n + i] = g.d(T[i], T[j]);
                w[i * n + (k + i)] = w[(k + i) * n + i] = g.d(T[i], g.boundary_node);
            }
            for (size_t i = k; i < n; i++)
                for (size_t j = k; j < n; j++)
                    if (i != j) w[i * n + j] = 0;
            return enumerate_pm(n, w);
        };
        i64 w0 = oracle_class(false), w1 = oracle_class(true);
        checked++;
        CHECK(res.w_best == std::min(w0, w1));
        if (w1 < kNoEdge) CHECK(res.w_comp == std::max(w0, w1));
        CHECK(((res.obs_pred & 1) == 1) == (w1 < w0));
    }
    CHECK(checked > 300);
}
