#pragma once

// Central finite-difference verification of the hand-written backward pass.
// Points are screened for degeneracy first: near-ties in any selection
// (beam, parent argmax, max path, top-K boundary) or near-clamp scores make
// the loss non-differentiable there, so such points are resampled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "xmc/grad.hpp"
#include "xmc/model.hpp"

namespace testutil {

inline double loss_at(const xmc::ModelParams& model, const xmc::TrainConfig& config,
                      const xmc::SparseVector& x, const std::vector<uint32_t>& positives,
                      uint32_t point) {
    auto col = model.adjacency.build_column_index();
    xmc::PointForward fwd = xmc::forward_point(model, config, x, positives, point,
                                               /*training=*/true, &col);
    return fwd.loss.total();
}

// margin-based screening; tol should be well above the FD step
inline bool non_degenerate(const xmc::ModelParams& model, const xmc::TrainConfig& config,
                           const xmc::SparseVector& x, const std::vector<uint32_t>& positives,
                           uint32_t point, double tol) {
    auto col = model.adjacency.build_column_index();
    xmc::PointForward fwd;
    try {
        fwd = xmc::forward_point(model, config, x, positives, point, true, &col);
    } catch (...) {
        return false;
    }

    // clamp margins on cluster scores
    for (size_t c = 0; c < fwd.softmax.size(); ++c)
        if (std::abs(config.alpha * fwd.softmax[c] - 1.0) < tol) return false;

    // beam boundary: gap between rank b-1 and rank b unless both clamped at 1
    std::vector<double> sorted = fwd.shat;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    if (config.beam < sorted.size()) {
        double hi = sorted[config.beam - 1], lo = sorted[config.beam];
        if (!(hi == 1.0 && lo == 1.0) && hi - lo < tol) return false;
    }

    // edge clamp margins on every row
    const xmc::AdjacencyMatrix& a = model.adjacency;
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        if (a.row_labels[c].empty()) continue;
        std::vector<double> sm = a.row_softmax(c);
        for (double v : sm)
            if (std::abs(config.beta * v - 1.0) < tol) return false;
    }

    // parent argmax margins per positive
    for (uint32_t l : positives) {
        std::vector<double> ws;
        for (auto& [c, w] : col.cols[l]) ws.push_back(w);
        if (ws.size() >= 2) {
            std::sort(ws.begin(), ws.end(), std::greater<double>());
            if (ws[0] - ws[1] < tol) return false;
        }
    }

    // max-path margins: best vs second-best path per reached label
    {
        std::vector<std::vector<double>> per_label(a.num_labels);
        for (uint32_t c : fwd.shortlist.clusters) {
            std::vector<double> es = xmc::edge_scores(a, c, config.beta);
            for (size_t k = 0; k < a.row_labels[c].size(); ++k)
                per_label[a.row_labels[c][k]].push_back(fwd.shat[c] * es[k]);
        }
        for (auto& paths : per_label) {
            if (paths.size() < 2) continue;
            std::sort(paths.begin(), paths.end(), std::greater<double>());
            if (paths[0] - paths[1] < tol) return false;
        }
    }

    // top-K boundary among reached labels
    if (fwd.shortlist.reached.size() > config.shortlist_k) {
        std::vector<double> ys;
        for (auto& e : fwd.shortlist.reached) ys.push_back(e.score);
        std::sort(ys.begin(), ys.end(), std::greater<double>());
        if (ys[config.shortlist_k - 1] - ys[config.shortlist_k] < tol) return false;
    }
    return true;
}

struct FdReport {
    double max_rel_err = 0.0;
    size_t checked = 0;
};

inline void fd_compare(double analytic, double numeric, FdReport& rep) {
    double mag = std::max(std::abs(analytic), std::abs(numeric));
    double err;
    if (mag < 1e-6)
        err = std::abs(analytic - numeric) < 1e-8 ? 0.0 : 1.0;
    else
        err = std::abs(analytic - numeric) / mag;
    rep.max_rel_err = std::max(rep.max_rel_err, err);
    ++rep.checked;
}

// checks every parameter of every group at one point
inline FdReport fd_check_point(xmc::ModelParams model, const xmc::TrainConfig& config,
                               const xmc::SparseVector& x,
                               const std::vector<uint32_t>& positives, uint32_t point,
                               double h = 1e-5) {
    xmc::Gradients grads = xmc::Gradients::zeros_like(model);
    {
        auto col = model.adjacency.build_column_index();
        xmc::PointForward fwd = xmc::forward_point(model, config, x, positives, point, true,
                                                   &col);
        xmc::backward_point(model, config, x, fwd, grads);
    }

    FdReport rep;
    auto probe = [&](double& param, double analytic) {
        double saved = param;
        param = saved + h;
        double up = loss_at(model, config, x, positives, point);
        param = saved - h;
        double down = loss_at(model, config, x, positives, point);
        param = saved;
        fd_compare(analytic, (up - down) / (2.0 * h), rep);
    };

    if (model.encoder.trainable())
        for (size_t i = 0; i < model.encoder.projection.data().size(); ++i)
            probe(model.encoder.projection.data()[i], grads.d_projection.data()[i]);
    for (size_t i = 0; i < model.cluster_classifiers.data().size(); ++i)
        probe(model.cluster_classifiers.data()[i], grads.d_cluster.data()[i]);
    for (size_t i = 0; i < model.label_classifiers.data().size(); ++i)
        probe(model.label_classifiers.data()[i], grads.d_label.data()[i]);
    for (uint32_t c = 0; c < model.adjacency.num_clusters; ++c)
        for (size_t k = 0; k < model.adjacency.row_weights[c].size(); ++k)
            probe(model.adjacency.row_weights[c][k], grads.d_adjacency[c][k]);
    return rep;
}

}  // namespace testutil
