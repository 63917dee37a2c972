#pragma once

#include "cultivator/circuit.hpp"
#include "cultivator/rng.hpp"

namespace cultiv {

// Bit-plane Pauli-frame Monte-Carlo sampler.  Shots run in word-packed
// batches; measurement outcomes are frame flips relative to the noiseless
// reference, so every detector, postselect mark and observable plane is
// zero in the absence of noise.
struct BatchResult {
    size_t batch = 0, words = 0;
    size_t n_detectors = 0, n_observables = 0;
    std::vector<u64> det;        // n_detectors x words
    std::vector<u64> stage_fail; // n_stages x words, 1 = discard at that stage
    std::vector<u64> obs;        // n_observables x words

    bool det_bit(size_t d, size_t shot) const { return (det[d * words + shot / 64] >> (shot % 64)) & 1; }
    bool fail_bit(size_t s, size_t shot) const { return (stage_fail[s * words + shot / 64] >> (shot % 64)) & 1; }
    bool obs_bit(size_t o, size_t shot) const { return (obs[o * words + shot / 64] >> (shot % 64)) & 1; }
};

struct FrameSampler {
    explicit FrameSampler(const Circuit &noisy_circuit);

    size_t n_qubits = 0;
    size_t n_measurements = 0;
    size_t n_detectors = 0;
    size_t n_observables = 0;
    std::vector<std::string> stages;  // postselection stages in order of appearance

    BatchResult sample_batch(u64 seed, u64 batch_index, size_t batch_size) const;

  private:
    struct Step {
        Op op;
        u32 a = 0, b = 0, c = 0;
        double p = 0;
        u32 aux = 0;  // record index for M; annotation slot otherwise
    };
    std::vector<Step> steps_;
    struct Combo { u32 slot; std::vector<u32> recs; };
    std::vector<Combo> detectors_;
    std::vector<Combo> marks_;      // slot = stage id
    std::vector<Combo> obs_recs_;   // slot = observable id
    struct FrameObs { u32 obs; size_t step_pos; std::vector<std::pair<u8, u32>> paulis; };
    std::vector<FrameObs> frame_obs_;
};

}  // namespace cultiv
