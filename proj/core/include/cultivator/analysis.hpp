#pragma once

#include "cultivator/dem.hpp"

namespace cultiv {

struct StageEntry {
    std::string name;
    double volume = 0;        // qubits * depth (may sum several segments)
    u64 shots_entered = 0;
    u64 shots_survived = 0;
};

// Post-selection bookkeeping: ordered stages with survival counts.
// f_i is the cumulative fraction surviving through stage i; V = expected
// spacetime volume per kept shot, (1/f_M) sum_i f_i V_i with V after the last
// post-selection charged as V_M (zero when nothing follows it).
struct StageLedger {
    std::vector<StageEntry> stages;
    double tail_volume = 0;  // volume after the final post-selection (V_M)

    void merge(const StageLedger &other);
    double kept_fraction() const;  // f_M
};

double spacetime_volume(const StageLedger &ledger);
double expected_attempts(const StageLedger &ledger);

struct Interval {
    double lo = 0, hi = 1;
};
// Likelihood-ratio interval for a binomial proportion: the region within a
// factor `ratio` (default 1000) of the maximum likelihood.
Interval likelihood_interval(u64 hits, u64 total, double ratio = 1000.0);

struct MetricPoint {
    double g_thresh = 0;
    u64 kept = 0, total = 0, errors = 0;
    double kept_fraction = 0;
    double attempts = 0;
    double ler = 0;
    Interval ler_interval;
    double volume = 0;
    bool estimable = true;
};

struct DecodedShot {
    double gap = 0;
    bool is_error = false;
};
std::vector<MetricPoint> ler_curve(const std::vector<DecodedShot> &shots,
                                   u64 shots_entered, const std::vector<double> &thresholds,
                                   const StageLedger *ledger = nullptr);

// Minimum number of mechanisms whose combined flips hit no detector and no
// postselect bit but flip observable `obs_bit`.  Exact for w_max <= 2 by
// direct and pairwise enumeration; meet-in-the-middle joins for 3 and 4.
// Returns w_max + 1 when no such fault set exists with size <= w_max.
int fault_distance_search(const DetectorErrorModel &dem, int w_max, u32 obs_bit = 0);

// First-order logical rate: sum of p_e over mechanisms that flip the
// observable and nothing else.  The p -> 0 limit of LER/p is this sum / p.
double first_order_logical_rate(const DetectorErrorModel &dem, u32 obs_bit = 0);

std::string metrics_to_csv(const std::vector<MetricPoint> &points);
std::string ledger_to_json(const StageLedger &ledger);

}  // namespace cultiv
