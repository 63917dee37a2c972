#pragma once

#include "cultivator/dem.hpp"

namespace cultiv {

using i64 = std::int64_t;

// Exact minimum-weight perfect matching on a dense graph, O(n^3) primal-dual
// blossom algorithm with integer weights.  `w[i*n+j]` is the edge weight;
// use kNoEdge for missing edges.  Returns the total weight, or kNoEdge if no
// perfect matching exists.  `mate[i]` receives the partner of node i.
constexpr i64 kNoEdge = i64(1) << 56;
i64 min_weight_perfect_matching(size_t n, const std::vector<i64> &w, std::vector<int> &mate);

struct DecodeResult {
    u32 obs_pred = 0;    // predicted observable flips (all observables)
    i64 w_best = 0;      // integer weight of the best matching
    i64 w_comp = 0;      // best matching in the opposite class of observable 0
    double gap_db = 0;   // (w_comp - w_best) in decibans
    bool comp_exists = true;
};

// Matching graph built from a decomposed detector error model.  The gap
// observable (observable 0) is materialized as an extra node; the virtual
// boundary absorbs single-detector mechanisms.
struct MatchingGraph {
    // fixed-point scale for edge weights w = ln((1-q)/q)
    static constexpr double kScale = 65536.0;

    size_t n_nodes = 0;            // detector nodes + logical node + boundary node
    u32 logical_node = 0, boundary_node = 0;
    struct Edge { u32 u, v; i64 w; u32 obs_mask; };
    std::vector<Edge> edges;

    // all-pairs shortest paths and their observable masks
    std::vector<i64> dist;     // n_nodes * n_nodes
    std::vector<u32> path_obs;

    static MatchingGraph build(const DetectorErrorModel &dem);

    // defects: indices of fired detector nodes (unified detector space)
    DecodeResult decode(const std::vector<u32> &defects) const;

    i64 d(size_t a, size_t b) const { return dist[a * n_nodes + b]; }
    u32 pobs(size_t a, size_t b) const { return path_obs[a * n_nodes + b]; }

  private:
    i64 class_weight(const std::vector<u32> &terminals, u32 *obs_out) const;
};

// First-order decoded logical rate: sum of p_e over mechanisms that flip no
// postselect mark and whose decoded correction disagrees with their true
// observable-0 flip.  The p -> 0 limit of the post-selected LER.
double first_order_decoded_rate(const DetectorErrorModel &dem, const MatchingGraph &graph);

}  // namespace cultiv
