#include "cultivator/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <limits>
#include <set>
#include <unordered_map>

namespace cultiv {

void StageLedger::merge(const StageLedger &other) {
    if (stages.empty()) {
        *this = other;
        return;
    }
    require(stages.size() == other.stages.size(), "ledger shape mismatch");
    for (size_t i = 0; i < stages.size(); i++) {
        require(stages[i].name == other.stages[i].name, "ledger stage mismatch");
        stages[i].shots_entered += other.stages[i].shots_entered;
        stages[i].shots_survived += other.stages[i].shots_survived;
    }
}

double StageLedger::kept_fraction() const {
    if (stages.empty()) return 1.0;
    u64 entered = stages.front().shots_entered;
    u64 survived = stages.back().shots_survived;
    return entered ? double(survived) / double(entered) : 0.0;
}

double spacetime_volume(const StageLedger &ledger) {
    double fm = ledger.kept_fraction();
    if (fm <= 0) return std::numeric_limits<double>::infinity();
    u64 n0 = ledger.stages.empty() ? 1 : ledger.stages.front().shots_entered;
    double v = 0;
    for (const auto &st : ledger.stages) {
        double fi_prev = n0 ? double(st.shots_entered) / double(n0) : 0;
        v += fi_prev * st.volume;  // cost of executing the segment, paid by entrants
    }
    v += fm * ledger.tail_volume;
    return v / fm;
}

double expected_attempts(const StageLedger &ledger) {
    double fm = ledger.kept_fraction();
    if (fm <= 0) return std::numeric_limits<double>::infinity();
    return 1.0 / fm;
}

Interval likelihood_interval(u64 hits, u64 total, double ratio) {
    Interval iv;
    if (total == 0) return iv;
    double k = double(hits), n = double(total);
    double phat = k / n;
    double logratio = std::log(ratio);
    auto loglik = [&](double q) {
        if (q <= 0) return k == 0 ? 0.0 : -1e300;
        if (q >= 1) return k == n ? 0.0 : -1e300;
        return k * std::log(q) + (n - k) * std::log(1 - q);
    };
    double lmax = loglik(std::min(std::max(phat, 1e-300), 1 - 1e-16));
    auto bisect = [&](double lo, double hi) {
        for (int it = 0; it < 200; it++) {
            double mid = 0.5 * (lo + hi);
            if (lmax - loglik(mid) > logratio) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto bisect_hi = [&](double lo, double hi) {
        for (int it = 0; it < 200; it++) {
            double mid = 0.5 * (lo + hi);
            if (lmax - loglik(mid) > logratio) hi = mid;
            else lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    iv.lo = hits == 0 ? 0.0 : bisect(0.0, phat);
    iv.hi = hits == total ? 1.0 : bisect_hi(phat, 1.0);
    return iv;
}

std::vector<MetricPoint> ler_curve(const std::vector<DecodedShot> &shots, u64 shots_entered,
                                   const std::vector<double> &thresholds,
                                   const StageLedger *ledger) {
    std::vector<MetricPoint> out;
    for (double th : thresholds) {
        MetricPoint mp;
        mp.g_thresh = th;
        mp.total = shots_entered;
        for (const auto &s : shots) {
            if (s.gap < th) continue;
            mp.kept++;
            if (s.is_error) mp.errors++;
        }
        mp.kept_fraction = shots_entered ? double(mp.kept) / double(shots_entered) : 0;
        mp.estimable = mp.kept > 0;
        mp.attempts = mp.kept ? double(shots_entered) / double(mp.kept) : 0;
        mp.ler = mp.kept ? double(mp.errors) / double(mp.kept) : 0;
        mp.ler_interval = likelihood_interval(mp.errors, std::max<u64>(mp.kept, 1));
        if (ledger) {
            StageLedger l2 = *ledger;
            // gap post-selection appended as a final stage with no volume after
            StageEntry gap{"gap", 0, l2.stages.empty() ? shots_entered
                                                       : l2.stages.back().shots_survived,
                           mp.kept};
            l2.stages.push_back(gap);
            mp.volume = spacetime_volume(l2);
        }
        out.push_back(mp);
    }
    return out;
}

// ---- fault distance ---------------------------------------------------------

namespace {

struct Sig {
    std::vector<u32> dets;  // sorted, XOR-reduced
    bool obs = false;

    bool operator==(const Sig &o) const { return obs == o.obs && dets == o.dets; }
};

struct SigHash {
    size_t operator()(const Sig &s) const {
        size_t h = s.obs ? 0x9e3779b97f4a7c15ull : 0x85ebca6b;
        for (u32 d : s.dets) h = h * 0x100000001b3ull ^ d;
        return h;
    }
};

Sig sig_xor(const Sig &a, const Sig &b) {
    Sig out;
    out.obs = a.obs ^ b.obs;
    std::set_symmetric_difference(a.dets.begin(), a.dets.end(), b.dets.begin(), b.dets.end(),
                                  std::back_inserter(out.dets));
    return out;
}

}  // namespace

int fault_distance_search(const DetectorErrorModel &dem, int w_max, u32 obs_bit) {
    require(w_max <= 4, "fault_distance_search: exact mode covers w_max <= 4");
    std::vector<Sig> mech;
    for (const auto &m : dem.mechanisms) {
        if (m.p <= 0) continue;
        mech.push_back({m.detectors, (m.obs_mask >> obs_bit & 1) != 0});
    }
    // w = 1
    for (const auto &m : mech)
        if (m.dets.empty() && m.obs) return 1;
    if (w_max < 2) return w_max + 1;

    // index mechanisms by detector
    std::unordered_map<u32, std::vector<u32>> by_det;
    for (u32 i = 0; i < mech.size(); i++)
        for (u32 d : mech[i].dets) by_det[d].push_back(i);

    // mechanism signature lookup
    std::unordered_map<Sig, u32, SigHash> sig_index;
    for (u32 i = 0; i < mech.size(); i++) sig_index.emplace(mech[i], i);

    // w = 2: two mechanisms with identical detector sets, opposite obs parity
    for (u32 i = 0; i < mech.size(); i++) {
        Sig want = mech[i];
        want.obs = !want.obs;
        auto it = sig_index.find(want);
        if (it != sig_index.end() && it->second != i) return 2;
    }
    if (w_max < 3) return w_max + 1;

    // connected pairs table keyed by signature
    struct PairRec { u32 a, b; };
    std::unordered_map<Sig, std::vector<PairRec>, SigHash> pair_table;
    std::vector<std::pair<Sig, PairRec>> pair_list;
    for (u32 i = 0; i < mech.size(); i++) {
        std::vector<u32> nbrs;
        for (u32 d : mech[i].dets)
            for (u32 j : by_det[d])
                if (j > i) nbrs.push_back(j);
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        for (u32 j : nbrs) {
            Sig s = sig_xor(mech[i], mech[j]);
            pair_table[s].push_back({i, j});
            pair_list.push_back({s, {i, j}});
        }
    }

    // w = 3: connected pair + single mechanism cancelling it
    for (const auto &[s, pr] : pair_list) {
        Sig want = s;
        want.obs = !want.obs;
        auto it = sig_index.find(want);
        if (it != sig_index.end() && it->second != pr.a && it->second != pr.b) return 3;
    }
    if (w_max < 4) return w_max + 1;

    // w = 4, case A: two disjoint (or any) connected pairs with matching sigs
    for (const auto &[s, pr] : pair_list) {
        Sig want = s;
        want.obs = !want.obs;
        auto it = pair_table.find(want);
        if (it == pair_table.end()) continue;
        for (const auto &other : it->second) {
            u32 set[4] = {pr.a, pr.b, other.a, other.b};
            std::sort(set, set + 4);
            if (std::unique(set, set + 4) == set + 4) return 4;
        }
    }
    // w = 4, case B: connected pair + two further mechanisms c, d with
    // sig(c) xor sig(d) = residual (c chosen from mechanisms on the lowest
    // residual detector, d looked up exactly)
    for (const auto &[s, pr] : pair_list) {
        Sig residual = s;
        residual.obs = !residual.obs;
        if (residual.dets.empty()) continue;  // covered by w=2/w=3 passes
        u32 d0 = residual.dets[0];
        auto itd = by_det.find(d0);
        if (itd == by_det.end()) continue;
        for (u32 c : itd->second) {
            if (c == pr.a || c == pr.b) continue;
            Sig want = sig_xor(residual, mech[c]);
            auto it = sig_index.find(want);
            if (it == sig_index.end()) continue;
            u32 dd = it->second;
            if (dd == c || dd == pr.a || dd == pr.b) continue;
            return 4;
        }
    }
    return w_max + 1;
}

double first_order_logical_rate(const DetectorErrorModel &dem, u32 obs_bit) {
    double sum = 0;
    for (const auto &m : dem.mechanisms)
        if (m.detectors.empty() && ((m.obs_mask >> obs_bit) & 1)) sum += m.p;
    return sum;
}

std::string metrics_to_csv(const std::vector<MetricPoint> &points) {
    std::ostringstream o;
    o << "threshold,kept_fraction,attempts,ler,ler_lo,ler_hi,volume\n";
    for (const auto &mp : points) {
        o << mp.g_thresh << ',' << mp.kept_fraction << ',' << mp.attempts << ',' << mp.ler
          << ',' << mp.ler_interval.lo << ',' << mp.ler_interval.hi << ',' << mp.volume
          << '\n';
    }
    return o.str();
}

std::string ledger_to_json(const StageLedger &ledger) {
    std::ostringstream o;
    o << "{\n  \"stages\": [";
    for (size_t i = 0; i < ledger.stages.size(); i++) {
        const auto &st = ledger.stages[i];
        o << (i ? ", " : "") << "\n    {\"name\": \"" << st.name << "\", \"volume\": "
          << st.volume << ", \"entered\": " << st.shots_entered
          << ", \"survived\": " << st.shots_survived << "}";
    }
    o << "\n  ],\n  \"kept_fraction\": " << ledger.kept_fraction()
      << ",\n  \"expected_attempts\": " << expected_attempts(ledger)
      << ",\n  \"spacetime_volume\": " << spacetime_volume(ledger) << "\n}\n";
    return o.str();
}

}  // namespace cultiv
