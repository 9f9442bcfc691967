#pragma once

#include <cstdint>
#include <vector>

#include "xmc/index.hpp"
#include "xmc/loss.hpp"
#include "xmc/model.hpp"

namespace xmc {

// Gradients for the four parameter groups; d_adjacency mirrors A's support.
struct Gradients {
    Matrix d_projection;
    Matrix d_cluster;
    Matrix d_label;
    std::vector<std::vector<double>> d_adjacency;

    static Gradients zeros_like(const ModelParams& model);
    void zero();
    void scale(double a);
    void add(const Gradients& other);

    // returns the name of the first group with a non-finite entry, or nullptr
    const char* find_non_finite() const;
};

// Forward intermediates for one point, kept for the backward pass.
struct PointForward {
    std::vector<double> phi;
    std::vector<double> softmax;        // softmax of cluster logits
    std::vector<double> shat;           // min(1, alpha * softmax)
    ShortlistResult shortlist;          // reached labels preserved
    std::vector<double> logits_label;   // w_l . phi per top-K entry
    std::vector<double> final_p;        // sigmoid * yhat per top-K entry
    std::vector<uint8_t> truth;         // per top-K entry
    std::vector<double> positive_yhat;  // per positive label (training mode)
    std::vector<uint32_t> positives;    // sorted
    LossBreakdown loss;
};

// Training mode includes parent clusters of the positives; positives with no
// label at all contribute no shortlist loss.
PointForward forward_point(const ModelParams& model, const TrainConfig& config,
                           const SparseVector& x, const std::vector<uint32_t>& positives,
                           uint32_t point_id, bool training,
                           const AdjacencyMatrix::ColumnIndex* col_index);

// Exact gradients of total_loss; max-over-paths routes only to the argmax
// path, clamps pass zero gradient when saturated, top-b/top-K index sets are
// non-differentiable.
void backward_point(const ModelParams& model, const TrainConfig& config, const SparseVector& x,
                    const PointForward& fwd, Gradients& grads);

}  // namespace xmc
