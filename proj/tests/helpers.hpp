#pragma once

// Shared fixtures for the test binaries: random model/dataset generators and
// independent reference implementations used as oracles. The references are
// deliberately naive (dense, quadratic) and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "xmc/adjacency.hpp"
#include "xmc/dataset.hpp"
#include "xmc/model.hpp"
#include "xmc/rng.hpp"

namespace testutil {

inline xmc::SparseVector random_sparse(xmc::Rng& rng, uint32_t dim, uint32_t nnz) {
    std::set<uint32_t> idx;
    while (idx.size() < nnz) idx.insert(static_cast<uint32_t>(rng.next_below(dim)));
    xmc::SparseVector v;
    for (uint32_t i : idx) v.push(i, rng.next_gaussian());
    return v;
}

// random adjacency with full column coverage
inline xmc::AdjacencyMatrix random_adjacency(xmc::Rng& rng, uint32_t C, uint32_t L,
                                             uint32_t kappa) {
    xmc::AdjacencyMatrix a;
    a.num_clusters = C;
    a.num_labels = L;
    a.kappa = kappa;
    a.row_labels.resize(C);
    a.row_weights.resize(C);
    std::vector<std::set<uint32_t>> rows(C);
    for (uint32_t l = 0; l < L; ++l) rows[rng.next_below(C)].insert(l);  // coverage
    for (uint32_t c = 0; c < C; ++c)
        while (rows[c].size() < kappa && rows[c].size() < L)
            rows[c].insert(static_cast<uint32_t>(rng.next_below(L)));
    for (uint32_t c = 0; c < C; ++c) {
        for (uint32_t l : rows[c]) {
            a.row_labels[c].push_back(l);
            a.row_weights[c].push_back(rng.next_gaussian());
        }
        // the coverage pass can leave a row above the target budget
        a.kappa = std::max<uint32_t>(a.kappa, a.row_labels[c].size());
    }
    return a;
}

inline xmc::ModelParams random_model(xmc::Rng& rng, uint32_t C, uint32_t L, uint32_t D,
                                     uint32_t D_bow, uint32_t kappa) {
    xmc::ModelParams m;
    m.encoder.mode = xmc::EncoderMode::Linear;
    m.encoder.dim = D;
    m.encoder.projection = xmc::Matrix(D_bow, D);
    for (double& v : m.encoder.projection.data()) v = rng.next_gaussian();
    m.cluster_classifiers = xmc::Matrix(C, D);
    for (double& v : m.cluster_classifiers.data()) v = rng.next_gaussian();
    m.label_classifiers = xmc::Matrix(L, D);
    for (double& v : m.label_classifiers.data()) v = rng.next_gaussian();
    m.adjacency = random_adjacency(rng, C, L, kappa);
    return m;
}

// --- reference implementations --------------------------------------------

inline std::vector<double> ref_softmax(const std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) sum += (out[i] = std::exp(z[i] - mx));
    for (double& v : out) v /= sum;
    return out;
}

inline std::vector<double> ref_cluster_scores(const xmc::Matrix& wc,
                                              const std::vector<double>& phi, double alpha) {
    std::vector<double> z(wc.rows());
    for (size_t c = 0; c < wc.rows(); ++c) {
        double s = 0.0;
        for (size_t d = 0; d < wc.cols(); ++d) s += wc.at(c, d) * phi[d];
        z[c] = s;
    }
    std::vector<double> sm = ref_softmax(z);
    for (double& v : sm) v = std::min(1.0, alpha * v);
    return sm;
}

// dense C x L edge-score matrix; entries off the support are 0
inline std::vector<std::vector<double>> ref_edge_matrix(const xmc::AdjacencyMatrix& a,
                                                        double beta) {
    std::vector<std::vector<double>> e(a.num_clusters,
                                       std::vector<double>(a.num_labels, 0.0));
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        if (a.row_labels[c].empty()) continue;
        std::vector<double> sm = ref_softmax(a.row_weights[c]);
        for (size_t k = 0; k < sm.size(); ++k)
            e[c][a.row_labels[c][k]] = std::min(1.0, beta * sm[k]);
    }
    return e;
}

struct RefPath {
    uint32_t label, cluster;
    double score;
};

// exhaustive path enumeration: all (c, l) with c selected, exact max / top-K
inline std::vector<RefPath> ref_shortlist(const std::vector<uint32_t>& selected,
                                          const std::vector<double>& scores,
                                          const xmc::AdjacencyMatrix& a, double beta,
                                          uint32_t K) {
    auto edges = ref_edge_matrix(a, beta);
    std::map<uint32_t, RefPath> best;  // label -> best path
    for (uint32_t c : selected) {
        for (uint32_t l : a.row_labels[c]) {
            double s = scores[c] * edges[c][l];
            auto it = best.find(l);
            if (it == best.end() || s > it->second.score ||
                (s == it->second.score && c < it->second.cluster))
                best[l] = {l, c, s};
        }
    }
    std::vector<RefPath> all;
    for (auto& [l, p] : best) all.push_back(p);
    std::stable_sort(all.begin(), all.end(), [](const RefPath& x, const RefPath& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.label < y.label;
    });
    if (all.size() > K) all.resize(K);
    return all;
}

// top-b clusters (ties toward lower id), optional parents of positives
inline std::vector<uint32_t> ref_select(const std::vector<double>& scores, uint32_t beam,
                                        const std::vector<uint32_t>& positives,
                                        const xmc::AdjacencyMatrix* a) {
    std::vector<uint32_t> ids(scores.size());
    for (uint32_t c = 0; c < scores.size(); ++c) ids[c] = c;
    std::stable_sort(ids.begin(), ids.end(), [&](uint32_t x, uint32_t y) {
        if (scores[x] != scores[y]) return scores[x] > scores[y];
        return x < y;
    });
    std::set<uint32_t> sel(ids.begin(), ids.begin() + std::min<size_t>(beam, ids.size()));
    if (a) {
        for (uint32_t l : positives) {
            uint32_t best_c = UINT32_MAX;
            double best_w = 0.0;
            for (uint32_t c = 0; c < a->num_clusters; ++c) {
                auto it = std::lower_bound(a->row_labels[c].begin(), a->row_labels[c].end(), l);
                if (it == a->row_labels[c].end() || *it != l) continue;
                double w = a->row_weights[c][it - a->row_labels[c].begin()];
                if (best_c == UINT32_MAX || w > best_w) {
                    best_c = c;
                    best_w = w;
                }
            }
            if (best_c != UINT32_MAX) sel.insert(best_c);
        }
    }
    return {sel.begin(), sel.end()};
}

// random truth/prediction pair for metric oracles
inline void random_eval_instance(xmc::Rng& rng, uint32_t L, xmc::Dataset& truth,
                                 std::vector<std::vector<std::pair<uint32_t, double>>>& ranked) {
    uint32_t n = 1 + static_cast<uint32_t>(rng.next_below(4));
    truth = {};
    truth.num_points = n;
    truth.num_features = 2;
    truth.num_labels = L;
    truth.label_indptr.push_back(0);
    ranked.assign(n, {});
    for (uint32_t i = 0; i < n; ++i) {
        xmc::SparseVector f;
        f.push(0, 1.0);
        truth.features.push_back(f);
        uint32_t nl = static_cast<uint32_t>(rng.next_below(5));  // may be zero
        std::set<uint32_t> ls;
        while (ls.size() < nl) ls.insert(static_cast<uint32_t>(rng.next_below(L)));
        for (uint32_t l : ls) truth.label_ids.push_back(l);
        truth.label_indptr.push_back(truth.label_ids.size());

        uint32_t np = 1 + static_cast<uint32_t>(rng.next_below(L));
        std::set<uint32_t> ps;
        while (ps.size() < np) ps.insert(static_cast<uint32_t>(rng.next_below(L)));
        for (uint32_t l : ps) ranked[i].push_back({l, rng.next_double()});
        std::stable_sort(ranked[i].begin(), ranked[i].end(),
                         [](const auto& x, const auto& y) {
                             if (x.second != y.second) return x.second > y.second;
                             return x.first < y.first;
                         });
    }
}

}  // namespace testutil
