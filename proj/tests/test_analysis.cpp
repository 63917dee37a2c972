#include "doctest.h"

#include <cmath>
#include <functional>
#include <map>

#include "cultivator/analysis.hpp"
#include "cultivator/rng.hpp"

using namespace cultiv;

TEST_CASE("spacetime volume formula") {
    // f = [1, 0.5], V = [100, 50], M=1 -> (1/0.5)(1*100 + 0.5*50) = 250
    StageLedger l;
    l.stages.push_back({"a", 100, 1000, 500});
    l.stages.push_back({"b", 50, 500, 500});
    // second stage entered by 500 (f=0.5), survives all; V_M = tail = 0
    CHECK(spacetime_volume(l) == doctest::Approx(250.0));
    CHECK(expected_attempts(l) == doctest::Approx(2.0));

    // all f_i = 1 -> V = sum V_i
    StageLedger l2;
    l2.stages.push_back({"a", 100, 10, 10});
    l2.stages.push_back({"b", 50, 10, 10});
    CHECK(spacetime_volume(l2) == doctest::Approx(150.0));

    // f_M = 0 -> infinite sentinel
    StageLedger l3;
    l3.stages.push_back({"a", 10, 5, 0});
    CHECK(std::isinf(spacetime_volume(l3)));
    CHECK(std::isinf(expected_attempts(l3)));

    // attempts examples
    StageLedger l4;
    l4.stages.push_back({"a", 0, 1000000, 345000});
    CHECK(expected_attempts(l4) == doctest::Approx(2.8986).epsilon(1e-3));
    StageLedger l5;
    l5.stages.push_back({"a", 0, 800, 100});
    CHECK(expected_attempts(l5) == doctest::Approx(8.0));
}

TEST_CASE("volume invariant under splitting a stage with no post-selection between") {
    StageLedger a;
    a.stages.push_back({"s1", 70, 100, 80});
    a.stages.push_back({"s2", 30, 80, 60});
    StageLedger b;
    b.stages.push_back({"s1", 70, 100, 80});
    b.stages.push_back({"s2a", 10, 80, 80});  // split: no discards inside s2a
    b.stages.push_back({"s2b", 20, 80, 60});
    CHECK(spacetime_volume(a) == doctest::Approx(spacetime_volume(b)));
}

TEST_CASE("likelihood interval behaves") {
    auto iv = likelihood_interval(0, 1000);
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi > 0);
    CHECK(iv.hi < 0.02);
    auto iv2 = likelihood_interval(50, 1000);
    CHECK(iv2.lo < 0.05);
    CHECK(iv2.hi > 0.05);
    CHECK(iv2.hi - iv2.lo < 0.06);
    // interval bounds ordered and contain the point estimate
    auto iv3 = likelihood_interval(3, 7);
    CHECK(iv3.lo < 3.0 / 7.0);
    CHECK(iv3.hi > 3.0 / 7.0);
}

TEST_CASE("ler_curve monotonicity") {
    Rng rng(5);
    std::vector<DecodedShot> shots;
    for (int i = 0; i < 20000; i++) {
        double gap = rng.uniform() * 30;
        bool err = rng.uniform() < 0.2 * std::exp(-gap / 5.0);
        shots.push_back({gap, err});
    }
    std::vector<double> th = {0, 5, 10, 15, 20};
    auto pts = ler_curve(shots, 40000, th);
    for (size_t i = 1; i < pts.size(); i++) {
        CHECK(pts[i].attempts >= pts[i - 1].attempts);
        CHECK(pts[i].ler <= pts[i - 1].ler + 1e-12);
    }
    CHECK(pts[0].kept == 20000);
    CHECK(pts[0].attempts == doctest::Approx(2.0));
}

// ---- fault distance ----------------------------------------------------------

static DetectorErrorModel dem_from(std::vector<std::pair<std::vector<u32>, u32>> ms) {
    DetectorErrorModel dem;
    dem.n_observables = 1;
    for (auto &[dets, obs] : ms) {
        std::sort(dets.begin(), dets.end());
        for (u32 d : dets) dem.n_detectors = std::max<size_t>(dem.n_detectors, d + 1);
        dem.mechanisms.push_back({0.001, dets, obs});
    }
    return dem;
}

// naive enumeration oracle over subsets of size <= w
static int naive_fd(const DetectorErrorModel &dem, int w_max) {
    size_t m = dem.mechanisms.size();
    auto test = [&](std::vector<size_t> &idx) {
        std::map<u32, int> cnt;
        u32 obs = 0;
        for (size_t i : idx) {
            for (u32 d : dem.mechanisms[i].detectors) cnt[d] ^= 1;
            obs ^= dem.mechanisms[i].obs_mask;
        }
        for (auto &[d, c] : cnt)
            if (c) return false;
        return (obs & 1) != 0;
    };
    for (int w = 1; w <= w_max; w++) {
        std::vector<size_t> idx(w);
        std::function<bool(int, size_t)> rec = [&](int pos, size_t start) -> bool {
            if (pos == w) return test(idx);
            for (size_t i = start; i < m; i++) {
                idx[pos] = i;
                if (rec(pos + 1, i + 1)) return true;
            }
            return false;
        };
        if (rec(0, 0)) return w;
    }
    return w_max + 1;
}

TEST_CASE("fault distance search vs naive enumeration") {
    // hand-built models with known distances
    auto d1 = dem_from({{{}, 1}, {{0, 1}, 0}});
    CHECK(fault_distance_search(d1, 4) == 1);

    auto d2 = dem_from({{{0}, 1}, {{0}, 0}, {{1, 2}, 0}});
    CHECK(fault_distance_search(d2, 4) == 2);

    auto d3 = dem_from({{{0}, 1}, {{0, 1}, 0}, {{1}, 0}, {{5, 6}, 0}});
    CHECK(fault_distance_search(d3, 4) == 3);

    // distance 4: a 4-cycle of detectors with the obs on one edge
    auto d4 = dem_from({{{0, 1}, 1}, {{1, 2}, 0}, {{2, 3}, 0}, {{3, 0}, 0}});
    CHECK(fault_distance_search(d4, 4) == 4);

    // nothing within budget
    auto d5 = dem_from({{{0, 1}, 1}, {{1, 2}, 0}});
    CHECK(fault_distance_search(d5, 4) == 5);
    CHECK(fault_distance_search(d5, 2) == 3);

    // random models vs the naive oracle
    Rng rng(31);
    for (int trial = 0; trial < 400; trial++) {
        std::vector<std::pair<std::vector<u32>, u32>> ms;
        size_t nm = 4 + rng.below(10);
        for (size_t i = 0; i < nm; i++) {
            std::vector<u32> dets;
            size_t nd = rng.below(3);
            for (size_t k = 0; k <= nd; k++) dets.push_back(u32(rng.below(6)));
            std::sort(dets.begin(), dets.end());
            dets.erase(std::unique(dets.begin(), dets.end()), dets.end());
            if (rng.below(4) == 0) dets.clear();
            u32 obs = rng.below(3) == 0 ? 1 : 0;
            if (dets.empty() && obs == 0) continue;
            ms.push_back({dets, obs});
        }
        if (ms.empty()) continue;
        auto dem = dem_from(ms);
        for (int w : {2, 3, 4})
            CHECK(fault_distance_search(dem, w) == naive_fd(dem, w));
    }
}

TEST_CASE("first order logical rate") {
    DetectorErrorModel dem;
    dem.n_detectors = 2;
    dem.n_observables = 1;
    dem.mechanisms.push_back({0.25, {}, 1});
    dem.mechanisms.push_back({0.125, {}, 1});
    dem.mechanisms.push_back({0.5, {0}, 1});
    CHECK(first_order_logical_rate(dem) == doctest::Approx(0.375));
}
