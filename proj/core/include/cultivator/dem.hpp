#pragma once

#include "cultivator/circuit.hpp"

namespace cultiv {

// One independent error mechanism: a single Pauli component of one noise
// channel, propagated to the end of the circuit.  Detector indices cover the
// unified space [0, n_detectors) ++ [n_detectors, n_detectors + n_marks):
// hard postselection bits are detectors that kept shots always read as zero.
struct Mechanism {
    double p = 0;
    std::vector<u32> detectors;  // sorted
    u32 obs_mask = 0;

    bool operator<(const Mechanism &o) const {
        return detectors != o.detectors ? detectors < o.detectors : obs_mask < o.obs_mask;
    }
};

struct DetectorErrorModel {
    size_t n_detectors = 0;  // real detectors
    size_t n_marks = 0;      // postselect bits appended after the detectors
    size_t n_observables = 0;
    std::vector<Mechanism> mechanisms;  // merged: unique (detectors, obs_mask)

    size_t n_nodes() const { return n_detectors + n_marks; }
};

// Frame-propagates every Pauli component of every noise channel.
DetectorErrorModel extract_dem(const Circuit &noisy);

// Splits every mechanism into graphlike pieces: <= 2 detectors each, and a
// mechanism flipping the gap observable (observable 0) keeps at most one
// detector so the observable can be treated as an extra matching-graph node.
// Components must exist as signatures of other mechanisms; otherwise this
// throws, naming the offending mechanism (a builder bug).
DetectorErrorModel decompose_dem(const DetectorErrorModel &dem);

std::string dem_to_text(const DetectorErrorModel &dem);

}  // namespace cultiv
