#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmc/clustering.hpp"

namespace xmc {

// Row-sparse learnable cluster-to-label matrix. Membership is defined by the
// stored indices; a stored weight may train to any real value and still
// participates. Every label must appear in at least one row.
struct AdjacencyMatrix {
    uint32_t num_clusters = 0;
    uint32_t num_labels = 0;
    uint32_t kappa = 0;

    std::vector<std::vector<uint32_t>> row_labels;  // strictly increasing per row
    std::vector<std::vector<double>> row_weights;

    size_t num_edges() const {
        size_t n = 0;
        for (const auto& r : row_labels) n += r.size();
        return n;
    }

    // per-label list of (cluster, weight); rebuilt on demand after structural edits
    struct ColumnIndex {
        std::vector<std::vector<std::pair<uint32_t, double>>> cols;
    };
    ColumnIndex build_column_index() const;

    // argmax-weight row containing `label`, ties toward the lower cluster id
    static uint32_t parent_of(const ColumnIndex& idx, uint32_t label);

    // sorted rows, per-row count <= kappa, indices valid, full column coverage
    void validate() const;

    // softmax over the stored entries of row c (absent entries excluded)
    std::vector<double> row_softmax(uint32_t c) const;
};

// A fixed to the partition's binary structure: one edge per label, constant weight.
AdjacencyMatrix adjacency_from_partition(const Partition& p);

// Serialized as u32 C, L, kappa header then per row: u32 count, sorted u32
// label ids, f32 weights.
AdjacencyMatrix load_adjacency(const std::string& path);
void save_adjacency(const AdjacencyMatrix& a, const std::string& path);

}  // namespace xmc
