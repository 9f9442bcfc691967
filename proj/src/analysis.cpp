#include "xmc/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "xmc/index.hpp"

namespace xmc {

PruneResult prune_threshold(const AdjacencyMatrix& adj, double beta, double threshold) {
    PruneResult res;
    res.adjacency = adj;
    size_t before = adj.num_edges(), removed = 0;
    for (uint32_t c = 0; c < adj.num_clusters; ++c) {
        std::vector<double> es = edge_scores(adj, c, beta);
        auto& ids = res.adjacency.row_labels[c];
        auto& w = res.adjacency.row_weights[c];
        size_t keep = 0;
        for (size_t k = 0; k < es.size(); ++k) {
            if (es[k] >= threshold) {
                ids[keep] = ids[k];
                w[keep] = w[k];
                ++keep;
            }
        }
        removed += ids.size() - keep;
        ids.resize(keep);
        w.resize(keep);
    }
    res.pruned_fraction = before ? static_cast<double>(removed) / before : 0.0;

    std::vector<uint32_t> coverage(adj.num_labels, 0);
    for (const auto& row : res.adjacency.row_labels)
        for (uint32_t l : row) coverage[l]++;
    for (uint32_t l = 0; l < adj.num_labels; ++l)
        if (coverage[l] == 0) res.orphaned_labels.push_back(l);
    return res;
}

AdjacencyMatrix prune_topk(const AdjacencyMatrix& adj, uint32_t k) {
    AdjacencyMatrix out = adj;
    for (uint32_t c = 0; c < adj.num_clusters; ++c) {
        const auto& ids = adj.row_labels[c];
        const auto& w = adj.row_weights[c];
        if (ids.size() <= k) continue;
        std::vector<size_t> order(ids.size());
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + k, order.end(),
                         [&](size_t a, size_t b) {
                             return w[a] != w[b] ? w[a] > w[b] : ids[a] < ids[b];
                         });
        order.resize(k);
        std::sort(order.begin(), order.end());
        out.row_labels[c].clear();
        out.row_weights[c].clear();
        for (size_t i : order) {
            out.row_labels[c].push_back(ids[i]);
            out.row_weights[c].push_back(w[i]);
        }
    }
    return out;
}

std::vector<uint32_t> clusters_per_label(const AdjacencyMatrix& adj, double beta,
                                         double threshold) {
    std::vector<uint32_t> counts(adj.num_labels, 0);
    for (uint32_t c = 0; c < adj.num_clusters; ++c) {
        std::vector<double> es = edge_scores(adj, c, beta);
        for (size_t k = 0; k < es.size(); ++k)
            if (es[k] > threshold) counts[adj.row_labels[c][k]]++;
    }
    return counts;
}

EdgeStats edge_stats(const AdjacencyMatrix& adj, double beta,
                     const std::vector<uint32_t>& label_frequencies,
                     double assignment_threshold) {
    EdgeStats stats;
    stats.assignment_threshold = assignment_threshold;

    size_t max_len = 0;
    for (const auto& row : adj.row_labels) max_len = std::max(max_len, row.size());
    stats.mean_sorted_profile.assign(max_len, 0.0);
    stats.profile_counts.assign(max_len, 0);
    for (uint32_t c = 0; c < adj.num_clusters; ++c) {
        std::vector<double> anorm = adj.row_softmax(c);
        std::sort(anorm.rbegin(), anorm.rend());
        for (size_t k = 0; k < anorm.size(); ++k) {
            stats.mean_sorted_profile[k] += anorm[k];
            stats.profile_counts[k]++;
        }
    }
    for (size_t k = 0; k < max_len; ++k)
        if (stats.profile_counts[k]) stats.mean_sorted_profile[k] /= stats.profile_counts[k];

    if (label_frequencies.size() == adj.num_labels) {
        std::vector<uint32_t> counts = clusters_per_label(adj, beta, assignment_threshold);
        std::vector<uint32_t> order(adj.num_labels);
        std::iota(order.begin(), order.end(), 0);
        // decile 0 holds the most frequent labels
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return label_frequencies[a] != label_frequencies[b]
                       ? label_frequencies[a] > label_frequencies[b]
                       : a < b;
        });
        stats.clusters_per_decile.assign(10, 0.0);
        std::vector<uint32_t> sizes(10, 0);
        for (uint32_t i = 0; i < adj.num_labels; ++i) {
            size_t d = std::min<size_t>(9, i * 10ull / adj.num_labels);
            stats.clusters_per_decile[d] += counts[order[i]];
            sizes[d]++;
        }
        for (size_t d = 0; d < 10; ++d)
            if (sizes[d]) stats.clusters_per_decile[d] /= sizes[d];
    }
    return stats;
}

}  // namespace xmc
