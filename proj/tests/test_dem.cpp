#include "doctest.h"

#include "cultivator/dem.hpp"
#include "cultivator/framesim.hpp"

using namespace cultiv;

TEST_CASE("p=0 channels give an empty model") {
    Circuit c = parse_circuit("R 0\nTICK\nDEPOLARIZE1(0) 0\nM 0\nDETECTOR rec[-1]\n");
    auto dem = extract_dem(c);
    CHECK(dem.mechanisms.empty());
}

TEST_CASE("single X channel between two rounds flips two detectors") {
    std::string text =
        "R 0 1\nTICK\nCX 0 1\nTICK\nM 1\nR 1\nTICK\n"
        "X_ERROR(0.01) 0\nCX 0 1\nTICK\nM 1\nDETECTOR rec[-1] rec[-2]\nR 1\nTICK\n"
        "CX 0 1\nTICK\nM 1\nDETECTOR rec[-1] rec[-2]\n";
    auto dem = extract_dem(parse_circuit(text));
    REQUIRE(dem.mechanisms.size() == 1);
    CHECK(dem.mechanisms[0].p == doctest::Approx(0.01));
    CHECK(dem.mechanisms[0].detectors == std::vector<u32>{0});
    CHECK(dem.mechanisms[0].obs_mask == 0);
}

TEST_CASE("mechanisms merge probabilities") {
    // two independent X channels on the same qubit at the same spot
    std::string text =
        "R 0 1\nTICK\nX_ERROR(0.1) 0\nX_ERROR(0.2) 0\nCX 0 1\nTICK\nM 1\nDETECTOR rec[-1]\n";
    auto dem = extract_dem(parse_circuit(text));
    REQUIRE(dem.mechanisms.size() == 1);
    CHECK(dem.mechanisms[0].p == doctest::Approx(0.1 * 0.8 + 0.2 * 0.9));
}

TEST_CASE("dem matches frame sampler flip statistics") {
    // each mechanism's detector signature must match what the sampler produces
    std::string text =
        "R 0 1 2\nTICK\nH 0\nTICK\nCX 0 1\nDEPOLARIZE2(0.03) 0 1\nTICK\nCX 1 2\nTICK\n"
        "M 2\nDETECTOR rec[-1]\nM 0 1\nOBSERVABLE_INCLUDE(0) rec[-1] rec[-2]\n";
    Circuit c = parse_circuit(text);
    auto dem = extract_dem(c);
    CHECK(dem.n_detectors == 1);
    // components of one channel are mutually exclusive, so the exact flip
    // probability is the plain sum of the flipping components' probabilities
    double p_det = 0;
    for (const auto &m : dem.mechanisms)
        if (!m.detectors.empty()) p_det += m.p;
    FrameSampler fs(c);
    size_t n = 400000, hits = 0;
    auto b = fs.sample_batch(17, 0, n);
    for (size_t s = 0; s < n; s++) hits += b.det_bit(0, s);
    CHECK(std::abs(double(hits) / double(n) - p_det) < 0.002);
}

TEST_CASE("marks appear as postselect nodes") {
    std::string text = "R 0\nTICK\nX_ERROR(0.25) 0\nM 0\nPOSTSELECT(inj) rec[-1]\n";
    auto dem = extract_dem(parse_circuit(text));
    CHECK(dem.n_detectors == 0);
    CHECK(dem.n_marks == 1);
    REQUIRE(dem.mechanisms.size() == 1);
    CHECK(dem.mechanisms[0].detectors == std::vector<u32>{0});
}

TEST_CASE("decompose splits Y-type four-detector mechanisms") {
    DetectorErrorModel dem;
    dem.n_detectors = 4;
    dem.n_observables = 1;
    dem.mechanisms.push_back({0.01, {0, 1}, 0});
    dem.mechanisms.push_back({0.01, {2, 3}, 0});
    dem.mechanisms.push_back({0.02, {0, 1, 2, 3}, 0});
    auto d2 = decompose_dem(dem);
    for (const auto &m : d2.mechanisms) CHECK(m.detectors.size() <= 2);
    // the 4-detector mechanism merged into both pairs
    double expect = 0.01 * (1 - 0.02) + 0.02 * (1 - 0.01);
    for (const auto &m : d2.mechanisms) CHECK(m.p == doctest::Approx(expect));

    // undecomposable: no atoms cover {0,2} pairing
    DetectorErrorModel bad;
    bad.n_detectors = 3;
    bad.mechanisms.push_back({0.01, {0, 1, 2}, 0});
    CHECK_THROWS_WITH_AS(decompose_dem(bad), doctest::Contains("undecomposable"), Error);
}

TEST_CASE("gap-flipping two-detector mechanisms split against boundary atoms") {
    DetectorErrorModel dem;
    dem.n_detectors = 2;
    dem.n_observables = 1;
    dem.mechanisms.push_back({0.01, {0}, 1});      // obs boundary edge
    dem.mechanisms.push_back({0.01, {1}, 0});      // plain boundary edge
    dem.mechanisms.push_back({0.03, {0, 1}, 1});   // crossing error, must split
    auto d2 = decompose_dem(dem);
    for (const auto &m : d2.mechanisms) {
        if (m.obs_mask & 1) CHECK(m.detectors.size() <= 1);
    }
}
