#include "xmc/index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xmc/rng.hpp"

namespace xmc {

std::vector<double> cluster_scores(const Matrix& cluster_classifiers,
                                   const std::vector<double>& phi_x, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("cluster_scores: alpha must be > 0");
    size_t c = cluster_classifiers.rows();
    std::vector<double> logits(c);
    for (size_t i = 0; i < c; ++i)
        logits[i] = dot(cluster_classifiers.row(i), phi_x.data(), phi_x.size());
    double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (size_t i = 0; i < c; ++i) {
        logits[i] = std::exp(logits[i] - m);
        z += logits[i];
    }
    for (size_t i = 0; i < c; ++i) logits[i] = std::min(1.0, alpha * logits[i] / z);
    return logits;
}

std::vector<uint32_t> select_clusters(const std::vector<double>& scores, uint32_t beam) {
    return select_clusters(scores, beam, {}, AdjacencyMatrix{}, {});
}

std::vector<uint32_t> select_clusters(const std::vector<double>& scores, uint32_t beam,
                                      const std::vector<uint32_t>& positives,
                                      const AdjacencyMatrix& adj,
                                      const AdjacencyMatrix::ColumnIndex& col_index) {
    uint32_t c = static_cast<uint32_t>(scores.size());
    if (beam > c) throw std::invalid_argument("select_clusters: beam must be <= C");
    std::vector<uint32_t> order(c);
    for (uint32_t i = 0; i < c; ++i) order[i] = i;
    // ties toward the lower cluster id
    std::partial_sort(order.begin(), order.begin() + beam, order.end(),
                      [&](uint32_t a, uint32_t b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    std::vector<uint32_t> selected(order.begin(), order.begin() + beam);
    for (uint32_t l : positives)
        selected.push_back(AdjacencyMatrix::parent_of(col_index, l));
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    return selected;
}

std::vector<double> edge_scores(const AdjacencyMatrix& adj, uint32_t cluster, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("edge_scores: beta must be > 0");
    std::vector<double> s = adj.row_softmax(cluster);
    for (double& v : s) v = std::min(1.0, beta * v);
    return s;
}

ShortlistResult shortlist(const std::vector<uint32_t>& selected,
                          const std::vector<double>& scores, const AdjacencyMatrix& adj,
                          double beta, uint32_t k, bool keep_reached) {
    if (k == 0) throw std::invalid_argument("shortlist: K must be >= 1");
    ShortlistResult res;
    res.clusters = selected;

    // best (score, cluster) per reached label; clusters visited in ascending id
    // order so a strictly-greater test keeps the lower cluster id on ties
    std::vector<std::pair<uint32_t, std::pair<double, uint32_t>>> best;  // label -> (score, cluster)
    std::vector<int64_t> slot(adj.num_labels, -1);

    for (uint32_t c : selected) {
        std::vector<double> es = edge_scores(adj, c, beta);
        const auto& ids = adj.row_labels[c];
        res.scored_paths += ids.size();
        for (size_t i = 0; i < ids.size(); ++i) {
            double path = scores[c] * es[i];
            uint32_t l = ids[i];
            if (slot[l] < 0) {
                slot[l] = static_cast<int64_t>(best.size());
                best.push_back({l, {path, c}});
            } else if (path > best[slot[l]].second.first) {
                best[slot[l]].second = {path, c};
            }
        }
    }

    std::sort(best.begin(), best.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (keep_reached) {
        res.reached.reserve(best.size());
        for (const auto& [l, sc] : best)
            res.reached.push_back({l, sc.first, sc.second});
    }

    size_t keep = std::min<size_t>(k, best.size());
    // score descending, ties toward the lower label id (stable over label order)
    std::stable_sort(best.begin(), best.end(), [](const auto& a, const auto& b) {
        return a.second.first > b.second.first;
    });
    res.entries.reserve(keep);
    for (size_t i = 0; i < keep; ++i)
        res.entries.push_back({best[i].first, best[i].second.first, best[i].second.second});
    return res;
}

Matrix cooccurrence_counts(const EncoderParams& encoder, const Matrix& cluster_classifiers,
                           double alpha, const Dataset& ds, uint32_t beam) {
    uint32_t c = static_cast<uint32_t>(cluster_classifiers.rows());
    Matrix counts(c, ds.num_labels);
    for (uint32_t i = 0; i < ds.num_points; ++i) {
        std::vector<double> phi = encode(encoder, ds.features[i], i);
        std::vector<double> s = cluster_scores(cluster_classifiers, phi, alpha);
        std::vector<uint32_t> topb = select_clusters(s, std::min(beam, c));
        for (uint32_t cc : topb)
            for (size_t p = ds.label_indptr[i]; p < ds.label_indptr[i + 1]; ++p)
                counts.at(cc, ds.label_ids[p]) += s[cc];
    }
    return counts;
}

AdjacencyMatrix init_adjacency(const EncoderParams& encoder, const Matrix& cluster_classifiers,
                               double alpha, const Dataset& ds, uint32_t beam, uint32_t kappa,
                               const Partition& partition, uint64_t seed) {
    uint32_t c = static_cast<uint32_t>(cluster_classifiers.rows());
    if (static_cast<uint64_t>(kappa) * c < ds.num_labels)
        throw std::invalid_argument("init_adjacency: kappa must be >= L/C");

    Matrix counts = cooccurrence_counts(encoder, cluster_classifiers, alpha, ds, beam);

    AdjacencyMatrix adj;
    adj.num_clusters = c;
    adj.num_labels = ds.num_labels;
    adj.kappa = kappa;
    adj.row_labels.resize(c);
    adj.row_weights.resize(c);

    std::vector<uint32_t> coverage(ds.num_labels, 0);
    for (uint32_t cc = 0; cc < c; ++cc) {
        std::vector<uint32_t> cand;
        for (uint32_t l = 0; l < ds.num_labels; ++l)
            if (counts.at(cc, l) > 0.0) cand.push_back(l);
        if (cand.size() > kappa) {
            // top-kappa by count, ties toward the lower label id
            std::nth_element(cand.begin(), cand.begin() + kappa, cand.end(),
                             [&](uint32_t a, uint32_t b) {
                                 double ca = counts.at(cc, a), cb = counts.at(cc, b);
                                 return ca != cb ? ca > cb : a < b;
                             });
            cand.resize(kappa);
        }
        std::sort(cand.begin(), cand.end());
        adj.row_labels[cc] = std::move(cand);
        for (uint32_t l : adj.row_labels[cc]) coverage[l]++;
    }

    // restore full column coverage from the stage-1 partition; never evict an
    // entry that is itself a label's only coverage
    std::vector<uint32_t> pending;
    for (uint32_t l = 0; l < ds.num_labels; ++l)
        if (coverage[l] == 0) pending.push_back(l);
    while (!pending.empty()) {
        uint32_t l = pending.back();
        pending.pop_back();
        uint32_t cc = partition.assignment[l];
        auto& row = adj.row_labels[cc];
        if (row.size() >= kappa) {
            // evict the lowest-count entry (ties: the higher label id)
            size_t worst = row.size();
            for (size_t i = 0; i < row.size(); ++i) {
                if (coverage[row[i]] < 2) continue;
                if (worst == row.size()) { worst = i; continue; }
                double wi = counts.at(cc, row[i]), ww = counts.at(cc, row[worst]);
                if (wi < ww || (wi == ww && row[i] > row[worst])) worst = i;
            }
            if (worst == row.size())
                throw std::runtime_error("init_adjacency: cannot restore coverage for label " +
                                         std::to_string(l) + " within kappa");
            coverage[row[worst]]--;
            row.erase(row.begin() + worst);
        }
        row.insert(std::upper_bound(row.begin(), row.end(), l), l);
        coverage[l]++;
    }

    // initial weights i.i.d. uniform(0,1), drawn in row-major support order
    Rng rng(seed);
    for (uint32_t cc = 0; cc < c; ++cc) {
        adj.row_weights[cc].resize(adj.row_labels[cc].size());
        for (double& w : adj.row_weights[cc]) w = rng.next_double();
    }
    adj.validate();
    return adj;
}

}  // namespace xmc
