#pragma once

#include <cstdint>
#include <vector>

#include "xmc/adjacency.hpp"

namespace xmc {

struct PruneResult {
    AdjacencyMatrix adjacency;
    double pruned_fraction = 0.0;
    std::vector<uint32_t> orphaned_labels;  // labels that lost all edges
};

// Remove entries whose post-softmax edge score min(1, beta * a_norm) is below
// the threshold. Scores are computed against the unpruned rows.
PruneResult prune_threshold(const AdjacencyMatrix& adj, double beta, double threshold);

// Keep per-row top-k entries by weight (ties toward the lower label id).
AdjacencyMatrix prune_topk(const AdjacencyMatrix& adj, uint32_t k);

struct EdgeStats {
    // mean of per-row a_norm profiles sorted descending (index = rank)
    std::vector<double> mean_sorted_profile;
    std::vector<uint32_t> profile_counts;  // rows contributing at each rank
    // per frequency decile (0 = most frequent labels): mean number of clusters
    // with edge score > threshold
    std::vector<double> clusters_per_decile;
    double assignment_threshold = 0.25;
};

EdgeStats edge_stats(const AdjacencyMatrix& adj, double beta,
                     const std::vector<uint32_t>& label_frequencies,
                     double assignment_threshold = 0.25);

// number of clusters assigned to each label at the given edge-score threshold
std::vector<uint32_t> clusters_per_label(const AdjacencyMatrix& adj, double beta,
                                         double threshold);

}  // namespace xmc
