#include "cultivator/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

namespace cultiv {

namespace {

// Maximum-weight matching, van Rantwijk's O(n^3) blossom algorithm with
// integer weights and the max-cardinality option.  Minimum-weight perfect
// matching is obtained by running it on transformed weights (K - w).
struct MaxWeightMatching {
    int nvertex;
    struct E { int i, j; i64 wt; };
    std::vector<E> edges;
    bool maxcardinality = true;

    // derived
    int nedge = 0;
    std::vector<int> endpoint;               // 2*nedge
    std::vector<std::vector<int>> neighbend; // per vertex: list of endpoint ids
    std::vector<int> mate;                   // endpoint id or -1
    std::vector<int> label;                  // 0 free, 1 S, 2 T  (2n slots)
    std::vector<int> labelend;
    std::vector<int> inblossom;
    std::vector<int> blossomparent;
    std::vector<std::vector<int>> blossomchilds;
    std::vector<int> blossombase;
    std::vector<std::vector<int>> blossomendps;
    std::vector<int> bestedge;
    std::vector<std::vector<int>> blossombestedges;
    std::vector<int> unusedblossoms;
    std::vector<i64> dualvar;
    std::vector<bool> allowedge;
    std::vector<int> queue;

    explicit MaxWeightMatching(int n) : nvertex(n) {}

    void add_edge(int i, int j, i64 wt) { edges.push_back({i, j, wt}); }

    i64 slack(int k) const {
        return dualvar[edges[k].i] + dualvar[edges[k].j] - 2 * edges[k].wt;
    }

    void blossom_leaves(int b, std::vector<int> &out) const {
        if (b < nvertex) { out.push_back(b); return; }
        for (int t : blossomchilds[b]) blossom_leaves(t, out);
    }

    void assign_label(int w, int t, int p) {
        int b = inblossom[w];
        label[w] = label[b] = t;
        labelend[w] = labelend[b] = p;
        bestedge[w] = bestedge[b] = -1;
        if (t == 1) {
            std::vector<int> leaves;
            blossom_leaves(b, leaves);
            for (int v : leaves) queue.push_back(v);
        } else {
            int base = blossombase[b];
            require(mate[base] >= 0, "matching: T-vertex without mate");
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom[v];
            if (label[b] & 4) { base = blossombase[b]; break; }
            path.push_back(b);
            label[b] |= 4;
            if (labelend[b] == -1) {
                v = -1;
            } else {
                v = endpoint[labelend[b]];
                b = inblossom[v];
                v = endpoint[labelend[b]];
            }
            if (w != -1) std::swap(v, w);
        }
        for (int b : path) label[b] &= ~4;
        return base;
    }

    void add_blossom(int base, int k) {
        int v = edges[k].i, w = edges[k].j;
        int bb = inblossom[base], bv = inblossom[v], bw = inblossom[w];
        int b = unusedblossoms.back();
        unusedblossoms.pop_back();
        blossombase[b] = base;
        blossomparent[b] = -1;
        blossomparent[bb] = b;
        std::vector<int> path, endps;
        while (bv != bb) {
            blossomparent[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend[bv]);
            v = endpoint[labelend[bv]];
            bv = inblossom[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend[bw] ^ 1);
            w = endpoint[labelend[bw]];
            bw = inblossom[w];
        }
        blossomchilds[b] = path;
        blossomendps[b] = endps;
        label[b] = 1;
        labelend[b] = labelend[bb];
        dualvar[b] = 0;
        std::vector<int> leaves;
        blossom_leaves(b, leaves);
        for (int x : leaves) {
            if (label[inblossom[x]] == 2) queue.push_back(x);
            inblossom[x] = b;
        }
        // compute best edges
        std::vector<int> bestedgeto(2 * nvertex, -1);
        for (int bvv : path) {
            std::vector<std::vector<int>> nblists;
            if (blossombestedges[bvv].empty()) {
                std::vector<int> lv;
                blossom_leaves(bvv, lv);
                nblists.resize(lv.size());
                for (size_t idx = 0; idx < lv.size(); idx++) {
                    for (int p : neighbend[lv[idx]]) nblists[idx].push_back(p / 2);
                }
            } else {
                nblists.push_back(blossombestedges[bvv]);
            }
            for (auto &nblist : nblists)
                for (int kk : nblist) {
                    int i = edges[kk].i, j = edges[kk].j;
                    if (inblossom[j] == b) std::swap(i, j);
                    int bj = inblossom[j];
                    if (bj != b && label[bj] == 1 &&
                        (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
                        bestedgeto[bj] = kk;
                }
            blossombestedges[bvv].clear();
            bestedge[bvv] = -1;
        }
        blossombestedges[b].clear();
        for (int kk : bestedgeto)
            if (kk != -1) blossombestedges[b].push_back(kk);
        bestedge[b] = -1;
        for (int kk : blossombestedges[b])
            if (bestedge[b] == -1 || slack(kk) < slack(bestedge[b])) bestedge[b] = kk;
    }

    void expand_blossom(int b, bool endstage) {
        for (int s : blossomchilds[b]) {
            blossomparent[s] = -1;
            if (s < nvertex) {
                inblossom[s] = s;
            } else if (endstage && dualvar[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                std::vector<int> lv;
                blossom_leaves(s, lv);
                for (int v : lv) inblossom[v] = s;
            }
        }
        if (!endstage && label[b] == 2) {
            int entrychild = inblossom[endpoint[labelend[b] ^ 1]];
            int jj = -1;
            for (size_t idx = 0; idx < blossomchilds[b].size(); idx++)
                if (blossomchilds[b][idx] == entrychild) { jj = int(idx); break; }
            int j = jj;
            int jstep, endptrick;
            if (j & 1) { j -= int(blossomchilds[b].size()); jstep = 1; endptrick = 0; }
            else { jstep = -1; endptrick = 1; }
            int p = labelend[b];
            while (j != 0) {
                label[endpoint[p ^ 1]] = 0;
                int idx1 = ((j - endptrick) % int(blossomendps[b].size()) +
                            int(blossomendps[b].size())) % int(blossomendps[b].size());
                label[endpoint[blossomendps[b][idx1] ^ endptrick ^ 1]] = 0;
                assign_label(endpoint[p ^ 1], 2, p);
                allowedge[blossomendps[b][idx1] / 2] = true;
                j += jstep;
                int idx2 = ((j - endptrick) % int(blossomendps[b].size()) +
                            int(blossomendps[b].size())) % int(blossomendps[b].size());
                p = blossomendps[b][idx2] ^ endptrick;
                allowedge[p / 2] = true;
                j += jstep;
            }
            int bv = blossomchilds[b][((j % int(blossomchilds[b].size())) +
                                       int(blossomchilds[b].size())) %
                                      int(blossomchilds[b].size())];
            label[endpoint[p ^ 1]] = label[bv] = 2;
            labelend[endpoint[p ^ 1]] = labelend[bv] = p;
            bestedge[bv] = -1;
            j += jstep;
            while (blossomchilds[b][((j % int(blossomchilds[b].size())) +
                                     int(blossomchilds[b].size())) %
                                    int(blossomchilds[b].size())] != entrychild) {
                int bvv = blossomchilds[b][((j % int(blossomchilds[b].size())) +
                                            int(blossomchilds[b].size())) %
                                           int(blossomchilds[b].size())];
                if (label[bvv] == 1) { j += jstep; continue; }
                std::vector<int> lv;
                blossom_leaves(bvv, lv);
                int vv = -1;
                for (int x : lv)
                    if (label[x] != 0) { vv = x; break; }
                if (vv != -1) {
                    label[vv] = 0;
                    label[endpoint[mate[blossombase[bvv]]]] = 0;
                    assign_label(vv, 2, labelend[vv]);
                }
                j += jstep;
            }
        }
        label[b] = labelend[b] = -1;
        blossomchilds[b].clear();
        blossomendps[b].clear();
        blossombase[b] = -1;
        blossombestedges[b].clear();
        bestedge[b] = -1;
        unusedblossoms.push_back(b);
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent[t] != b) t = blossomparent[t];
        if (t >= nvertex) augment_blossom(t, v);
        int i = -1;
        for (size_t idx = 0; idx < blossomchilds[b].size(); idx++)
            if (blossomchilds[b][idx] == t) { i = int(idx); break; }
        int j = i;
        int n_ch = int(blossomchilds[b].size());
        int jstep, endptrick;
        if (i & 1) { j -= n_ch; jstep = 1; endptrick = 0; }
        else { jstep = -1; endptrick = 1; }
        while (j != 0) {
            j += jstep;
            int tt = blossomchilds[b][((j % n_ch) + n_ch) % n_ch];
            int p = blossomendps[b][(((j - endptrick) % n_ch) + n_ch) % n_ch] ^ endptrick;
            if (tt >= nvertex) augment_blossom(tt, endpoint[p]);
            j += jstep;
            tt = blossomchilds[b][((j % n_ch) + n_ch) % n_ch];
            if (tt >= nvertex) augment_blossom(tt, endpoint[p ^ 1]);
            mate[endpoint[p]] = p ^ 1;
            mate[endpoint[p ^ 1]] = p;
        }
        std::rotate(blossomchilds[b].begin(), blossomchilds[b].begin() + i,
                    blossomchilds[b].end());
        std::rotate(blossomendps[b].begin(), blossomendps[b].begin() + i,
                    blossomendps[b].end());
        blossombase[b] = blossombase[blossomchilds[b][0]];
        require(blossombase[b] == v, "matching: augment_blossom base mismatch");
    }

    void augment_matching(int k) {
        int v = edges[k].i, w = edges[k].j;
        for (auto [s, p] : {std::pair<int, int>{v, 2 * k + 1}, {w, 2 * k}}) {
            while (true) {
                int bs = inblossom[s];
                require(label[bs] == 1, "matching: augment from non-S vertex");
                int pe = labelend[bs];
                if (bs >= nvertex) augment_blossom(bs, s);
                mate[s] = p;
                if (pe == -1) break;
                int t = endpoint[pe];
                int bt = inblossom[t];
                require(label[bt] == 2, "matching: bad alternating path");
                v = endpoint[labelend[bt]];
                int j = endpoint[labelend[bt] ^ 1];
                require(blossombase[bt] == t, "matching: T blossom base mismatch");
                if (bt >= nvertex) augment_blossom(bt, j);
                mate[j] = labelend[bt];
                p = labelend[bt] ^ 1;
                s = v;
            }
        }
    }

    // returns matched pairs via mate (endpoint ids); call run() once
    void run() {
        nedge = int(edges.size());
        if (nvertex == 0) return;
        i64 maxweight = 0;
        for (auto &e : edges) maxweight = std::max(maxweight, e.wt);
        endpoint.resize(2 * nedge);
        for (int k = 0; k < nedge; k++) {
            endpoint[2 * k] = edges[k].i;
            endpoint[2 * k + 1] = edges[k].j;
        }
        neighbend.assign(nvertex, {});
        for (int k = 0; k < nedge; k++) {
            neighbend[edges[k].i].push_back(2 * k + 1);
            neighbend[edges[k].j].push_back(2 * k);
        }
        mate.assign(nvertex, -1);
        label.assign(2 * nvertex, 0);
        labelend.assign(2 * nvertex, -1);
        inblossom.resize(nvertex);
        for (int v = 0; v < nvertex; v++) inblossom[v] = v;
        blossomparent.assign(2 * nvertex, -1);
        blossomchilds.assign(2 * nvertex, {});
        blossombase.resize(2 * nvertex);
        for (int v = 0; v < nvertex; v++) blossombase[v] = v;
        for (int v = nvertex; v < 2 * nvertex; v++) blossombase[v] = -1;
        blossomendps.assign(2 * nvertex, {});
        bestedge.assign(2 * nvertex, -1);
        blossombestedges.assign(2 * nvertex, {});
        unusedblossoms.clear();
        for (int v = nvertex; v < 2 * nvertex; v++) unusedblossoms.push_back(v);
        dualvar.assign(2 * nvertex, 0);
        for (int v = 0; v < nvertex; v++) dualvar[v] = maxweight;
        allowedge.assign(nedge, false);
        queue.clear();

        for (int t = 0; t < nvertex; t++) {
            label.assign(2 * nvertex, 0);
            bestedge.assign(2 * nvertex, -1);
            for (int v = nvertex; v < 2 * nvertex; v++) blossombestedges[v].clear();
            allowedge.assign(nedge, false);
            queue.clear();
            for (int v = 0; v < nvertex; v++)
                if (mate[v] == -1 && label[inblossom[v]] == 0) assign_label(v, 1, -1);
            bool augmented = false;
            while (true) {
                while (!queue.empty() && !augmented) {
                    int v = queue.back();
                    queue.pop_back();
                    require(label[inblossom[v]] == 1, "matching: queue vertex not S");
                    for (int p : neighbend[v]) {
                        int k = p / 2;
                        int w = endpoint[p];
                        if (inblossom[v] == inblossom[w]) continue;
                        if (!allowedge[k]) {
                            i64 kslack = slack(k);
                            if (kslack <= 0) allowedge[k] = true;
                            else if (label[inblossom[w]] == 1) {
                                int b = inblossom[v];
                                if (bestedge[b] == -1 || kslack < slack(bestedge[b]))
                                    bestedge[b] = k;
                                continue;
                            } else if (label[w] == 0) {
                                if (bestedge[w] == -1 || kslack < slack(bestedge[w]))
                                    bestedge[w] = k;
                                continue;
                            } else {
                                continue;
                            }
                        }
                        if (label[inblossom[w]] == 1) {
                            int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label[inblossom[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label[w] == 0) {
                            // w sits inside a T-blossom: label the vertex only
                            label[w] = 2;
                            labelend[w] = p ^ 1;
                        }
                    }
                }
                if (augmented) break;
                // dual update
                int deltatype = -1;
                i64 delta = 0;
                int deltaedge = -1, deltablossom = -1;
                if (!maxcardinality) {
                    deltatype = 1;
                    delta = *std::min_element(dualvar.begin(), dualvar.begin() + nvertex);
                }
                for (int v = 0; v < nvertex; v++) {
                    if (label[inblossom[v]] == 0 && bestedge[v] != -1) {
                        i64 d = slack(bestedge[v]);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * nvertex; b++) {
                    if (blossomparent[b] == -1 && label[b] == 1 && bestedge[b] != -1) {
                        i64 kslack = slack(bestedge[b]);
                        require((kslack & 1) == 0, "matching: odd S-S slack");
                        i64 d = kslack / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge[b];
                        }
                    }
                }
                for (int b = nvertex; b < 2 * nvertex; b++) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1 && label[b] == 2 &&
                        (deltatype == -1 || dualvar[b] < delta)) {
                        delta = dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    // no progress possible: max cardinality reached
                    deltatype = 1;
                    delta = std::max<i64>(0, *std::min_element(dualvar.begin(),
                                                               dualvar.begin() + nvertex));
                }
                for (int v = 0; v < nvertex; v++) {
                    int lb = label[inblossom[v]];
                    if (lb == 1) dualvar[v] -= delta;
                    else if (lb == 2) dualvar[v] += delta;
                }
                for (int b = nvertex; b < 2 * nvertex; b++) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1) {
                        if (label[b] == 1) dualvar[b] += delta;
                        else if (label[b] == 2) dualvar[b] -= delta;
                    }
                }
                if (deltatype == 1) break;
                if (deltatype == 2) {
                    allowedge[deltaedge] = true;
                    int i = edges[deltaedge].i;
                    if (label[inblossom[i]] == 0) i = edges[deltaedge].j;
                    queue.push_back(i);
                } else if (deltatype == 3) {
                    allowedge[deltaedge] = true;
                    queue.push_back(edges[deltaedge].i);
                } else {
                    expand_blossom(deltablossom, false);
                }
            }
            if (!augmented) break;
            for (int b = nvertex; b < 2 * nvertex; b++)
                if (blossomparent[b] == -1 && blossombase[b] >= 0 && label[b] == 1 &&
                    dualvar[b] == 0)
                    expand_blossom(b, true);
        }
    }
};

}  // namespace

i64 min_weight_perfect_matching(size_t n, const std::vector<i64> &w, std::vector<int> &mate) {
    require(n % 2 == 0, "perfect matching needs an even node count");
    mate.assign(n, -1);
    if (n == 0) return 0;
    // transform to max-weight with positive weights; scale by 2 to keep the
    // blossom duals integral
    i64 wmax = 0;
    for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++)
            if (w[i * n + j] < kNoEdge) wmax = std::max(wmax, w[i * n + j]);
    i64 K = wmax + 1;
    MaxWeightMatching m{int(n)};
    for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++)
            if (w[i * n + j] < kNoEdge) m.add_edge(int(i), int(j), 2 * (K - w[i * n + j]));
    m.run();
    i64 total = 0;
    for (size_t v = 0; v < n; v++) {
        if (m.mate[v] == -1) return kNoEdge;  // no perfect matching
        int u = m.endpoint[m.mate[v]];
        mate[v] = u;
        if (size_t(u) > v) total += w[v * n + size_t(u)];
    }
    return total;
}

// ---- matching graph -------------------------------------------------------

MatchingGraph MatchingGraph::build(const DetectorErrorModel &dem) {
    MatchingGraph g;
    size_t nd = dem.n_nodes();
    g.n_nodes = nd + 2;
    g.logical_node = u32(nd);
    g.boundary_node = u32(nd + 1);

    // merge parallel mechanisms (same endpoints, same ride-along masks)
    std::map<std::tuple<u32, u32, u32>, double> acc;
    for (const auto &m : dem.mechanisms) {
        require(m.detectors.size() <= 2, "matching graph needs a decomposed DEM");
        bool gap = m.obs_mask & 1;
        require(!gap || m.detectors.size() <= 1,
                "matching graph: gap-flipping mechanism with two detectors");
        u32 u, v;
        if (m.detectors.size() == 2) {
            u = m.detectors[0];
            v = m.detectors[1];
        } else if (m.detectors.size() == 1) {
            u = m.detectors[0];
            v = gap ? g.logical_node : g.boundary_node;
        } else {
            require(gap, "mechanism with no detectors and no gap observable");
            u = g.logical_node;
            v = g.boundary_node;
        }
        if (u > v) std::swap(u, v);
        double &q = acc[{u, v, m.obs_mask & ~u32(1)}];
        q = q * (1 - m.p) + m.p * (1 - q);
    }
    for (auto &[key, q] : acc) {
        if (q <= 0) continue;
        require(q < 0.5, "edge probability >= 1/2");
        i64 wt = i64(std::llround(std::log((1 - q) / q) * kScale));
        g.edges.push_back({std::get<0>(key), std::get<1>(key), std::max<i64>(wt, 1),
                           std::get<2>(key)});
    }

    // all-pairs shortest paths with observable masks, via repeated Dijkstra
    size_t N = g.n_nodes;
    g.dist.assign(N * N, kNoEdge);
    g.path_obs.assign(N * N, 0);
    std::vector<std::vector<std::pair<u32, u32>>> adj(N);  // (neighbor, edge idx)
    for (u32 e = 0; e < g.edges.size(); e++) {
        adj[g.edges[e].u].push_back({g.edges[e].v, e});
        adj[g.edges[e].v].push_back({g.edges[e].u, e});
    }
    for (size_t s = 0; s < N; s++) {
        auto *drow = &g.dist[s * N];
        auto *orow = &g.path_obs[s * N];
        drow[s] = 0;
        using QE = std::pair<i64, u32>;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        pq.push({0, u32(s)});
        std::vector<bool> done(N, false);
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (done[u]) continue;
            done[u] = true;
            for (auto [v, e] : adj[u]) {
                i64 nv = du + g.edges[e].w;
                if (nv < drow[v]) {
                    drow[v] = nv;
                    orow[v] = orow[u] ^ g.edges[e].obs_mask;
                    pq.push({nv, v});
                }
            }
        }
    }
    return g;
}

i64 MatchingGraph::class_weight(const std::vector<u32> &terminals, u32 *obs_out) const {
    // T-join via perfect matching over the terminals plus one boundary copy
    // per terminal (boundary copies pair up at zero cost).
    size_t k = terminals.size();
    if (obs_out) *obs_out = 0;
    if (k == 0) return 0;
    size_t n = 2 * k;
    std::vector<i64> w(n * n, kNoEdge);
    for (size_t i = 0; i < k; i++) {
        for (size_t j = i + 1; j < k; j++)
            w[i * n + j] = w[j * n + i] = d(terminals[i], terminals[j]);
        // terminal i's boundary copy
        w[i * n + (k + i)] = w[(k + i) * n + i] = d(terminals[i], boundary_node);
        for (size_t j = k; j < n; j++)
            if (j != k + i) w[i * n + j] = w[j * n + i] = kNoEdge;
    }
    for (size_t i = k; i < n; i++)
        for (size_t j = k; j < n; j++)
            if (i != j) w[i * n + j] = 0;  // spare boundary copies pair freely
    std::vector<int> mate;
    i64 total = min_weight_perfect_matching(n, w, mate);
    if (total >= kNoEdge) return kNoEdge;
    if (obs_out) {
        u32 obs = 0;
        for (size_t i = 0; i < k; i++) {
            int m = mate[i];
            if (size_t(m) < i) continue;  // counted from the lower side
            if (size_t(m) < k) obs ^= pobs(terminals[i], terminals[size_t(m)]);
            else if (size_t(m) == k + i) obs ^= pobs(terminals[i], boundary_node);
        }
        *obs_out = obs;
    }
    return total;
}

DecodeResult MatchingGraph::decode(const std::vector<u32> &defects) const {
    DecodeResult res;
    for (u32 dd : defects)
        require(d(dd, boundary_node) < kNoEdge, "defect disconnected from boundary");
    u32 obs_even = 0, obs_odd = 0;
    std::vector<u32> t0 = defects;
    i64 w0 = class_weight(t0, &obs_even);
    std::vector<u32> t1 = defects;
    t1.push_back(logical_node);
    i64 w1 = class_weight(t1, &obs_odd);
    require(w0 < kNoEdge, "syndrome not matchable");
    if (w1 >= kNoEdge) {
        // no path ever crosses the logical: gap is infinite
        res.w_best = w0;
        res.w_comp = w0;
        res.obs_pred = obs_even;
        res.gap_db = 1e30;
        res.comp_exists = false;
        return res;
    }
    if (w0 <= w1) {
        res.w_best = w0;
        res.w_comp = w1;
        res.obs_pred = obs_even;  // gap observable not flipped
    } else {
        res.w_best = w1;
        res.w_comp = w0;
        res.obs_pred = obs_odd | 1u;  // crossing the logical flips observable 0
    }
    res.gap_db = double(res.w_comp - res.w_best) / kScale * (10.0 / std::log(10.0));
    return res;
}

double first_order_decoded_rate(const DetectorErrorModel &dem, const MatchingGraph &graph) {
    double rate = 0;
    for (const auto &m : dem.mechanisms) {
        bool marked = false;
        std::vector<u32> defects;
        for (u32 d : m.detectors) {
            if (d >= dem.n_detectors) marked = true;
            else defects.push_back(d);
        }
        if (marked) continue;
        auto res = graph.decode(defects);
        if (((res.obs_pred ^ m.obs_mask) & 1) != 0) rate += m.p;
    }
    return rate;
}

}  // namespace cultiv
