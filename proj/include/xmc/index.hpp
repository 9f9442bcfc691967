#pragma once

#include <cstdint>
#include <vector>

#include "xmc/adjacency.hpp"
#include "xmc/dataset.hpp"
#include "xmc/encoder.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

// s_c = min(1, alpha * softmax(Wc phi)), all values in (0, 1]
std::vector<double> cluster_scores(const Matrix& cluster_classifiers,
                                   const std::vector<double>& phi_x, double alpha);

// Prediction mode: top-b clusters by score (ties toward the lower id).
// Training mode: additionally the argmax-weight parent of every positive.
// Returned ids are sorted ascending.
std::vector<uint32_t> select_clusters(const std::vector<double>& scores, uint32_t beam,
                                      const std::vector<uint32_t>& positives,
                                      const AdjacencyMatrix& adj,
                                      const AdjacencyMatrix::ColumnIndex& col_index);
std::vector<uint32_t> select_clusters(const std::vector<double>& scores, uint32_t beam);

// s_{c,l} = min(1, beta * softmax over the stored entries of row c)
std::vector<double> edge_scores(const AdjacencyMatrix& adj, uint32_t cluster, double beta);

struct ShortlistEntry {
    uint32_t label = 0;
    double score = 0.0;      // yhat: max path score reaching the label
    uint32_t cluster = 0;    // cluster of that path
};

struct ShortlistResult {
    std::vector<ShortlistEntry> entries;       // top-K, sorted by score descending
    std::vector<ShortlistEntry> reached;       // all reached labels, sorted by label id
    std::vector<uint32_t> clusters;            // selected cluster set, ascending
    size_t scored_paths = 0;                   // <= |clusters| * kappa
};

// Explore all edges of the selected clusters; yhat_l = max over paths, ties
// toward the lower cluster id; retain top-K labels (ties toward the lower
// label id). `keep_reached` preserves scores of every reached label, which
// training needs for positives that fall outside the top-K.
ShortlistResult shortlist(const std::vector<uint32_t>& selected,
                          const std::vector<double>& scores, const AdjacencyMatrix& adj,
                          double beta, uint32_t k, bool keep_reached = false);

// Stage-2 support selection: edges counted from the stage-1 model's top-b
// cluster placements, top-kappa per row, uniform(0,1) initial weights, then
// column coverage restored from the stage-1 partition.
AdjacencyMatrix init_adjacency(const EncoderParams& encoder, const Matrix& cluster_classifiers,
                               double alpha, const Dataset& ds, uint32_t beam, uint32_t kappa,
                               const Partition& partition, uint64_t seed);

// Dense A' = M^T Y accumulator, exposed for oracle checks.
Matrix cooccurrence_counts(const EncoderParams& encoder, const Matrix& cluster_classifiers,
                           double alpha, const Dataset& ds, uint32_t beam);

}  // namespace xmc
