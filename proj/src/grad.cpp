#include "xmc/grad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xmc {

Gradients Gradients::zeros_like(const ModelParams& model) {
    Gradients g;
    if (model.encoder.trainable())
        g.d_projection = Matrix(model.encoder.projection.rows(), model.encoder.projection.cols());
    g.d_cluster = Matrix(model.cluster_classifiers.rows(), model.cluster_classifiers.cols());
    g.d_label = Matrix(model.label_classifiers.rows(), model.label_classifiers.cols());
    g.d_adjacency.resize(model.adjacency.num_clusters);
    for (uint32_t c = 0; c < model.adjacency.num_clusters; ++c)
        g.d_adjacency[c].assign(model.adjacency.row_labels[c].size(), 0.0);
    return g;
}

void Gradients::zero() {
    d_projection.fill(0.0);
    d_cluster.fill(0.0);
    d_label.fill(0.0);
    for (auto& row : d_adjacency) std::fill(row.begin(), row.end(), 0.0);
}

void Gradients::scale(double a) {
    for (double& v : d_projection.data()) v *= a;
    for (double& v : d_cluster.data()) v *= a;
    for (double& v : d_label.data()) v *= a;
    for (auto& row : d_adjacency)
        for (double& v : row) v *= a;
}

void Gradients::add(const Gradients& other) {
    auto add_vec = [](std::vector<double>& a, const std::vector<double>& b) {
        for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add_vec(d_projection.data(), other.d_projection.data());
    add_vec(d_cluster.data(), other.d_cluster.data());
    add_vec(d_label.data(), other.d_label.data());
    for (size_t c = 0; c < d_adjacency.size(); ++c) add_vec(d_adjacency[c], other.d_adjacency[c]);
}

const char* Gradients::find_non_finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    if (!ok(d_projection.data())) return "encoder";
    if (!ok(d_cluster.data())) return "cluster_classifiers";
    if (!ok(d_label.data())) return "label_classifiers";
    for (const auto& row : d_adjacency)
        if (!ok(row)) return "adjacency";
    return nullptr;
}

PointForward forward_point(const ModelParams& model, const TrainConfig& config,
                           const SparseVector& x, const std::vector<uint32_t>& positives,
                           uint32_t point_id, bool training,
                           const AdjacencyMatrix::ColumnIndex* col_index) {
    PointForward fwd;
    fwd.positives = positives;
    fwd.phi = encode(model.encoder, x, point_id);

    uint32_t num_clusters = static_cast<uint32_t>(model.cluster_classifiers.rows());
    std::vector<double> logits(num_clusters);
    for (uint32_t c = 0; c < num_clusters; ++c)
        logits[c] = dot(model.cluster_classifiers.row(c), fwd.phi.data(), fwd.phi.size());
    double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    fwd.softmax.resize(num_clusters);
    for (uint32_t c = 0; c < num_clusters; ++c) {
        fwd.softmax[c] = std::exp(logits[c] - m);
        z += fwd.softmax[c];
    }
    fwd.shat.resize(num_clusters);
    for (uint32_t c = 0; c < num_clusters; ++c) {
        fwd.softmax[c] /= z;
        fwd.shat[c] = std::min(1.0, config.alpha * fwd.softmax[c]);
    }

    std::vector<uint32_t> selected;
    if (training && !positives.empty()) {
        selected = select_clusters(fwd.shat, std::min(config.beam, num_clusters), positives,
                                   model.adjacency, *col_index);
    } else {
        selected = select_clusters(fwd.shat, std::min(config.beam, num_clusters));
    }
    fwd.shortlist = shortlist(selected, fwd.shat, model.adjacency, config.beta,
                              config.shortlist_k, /*keep_reached=*/training);

    fwd.logits_label.reserve(fwd.shortlist.entries.size());
    fwd.final_p.reserve(fwd.shortlist.entries.size());
    fwd.truth.reserve(fwd.shortlist.entries.size());
    for (const ShortlistEntry& e : fwd.shortlist.entries) {
        double u = dot(model.label_classifiers.row(e.label), fwd.phi.data(), fwd.phi.size());
        fwd.logits_label.push_back(u);
        fwd.final_p.push_back(sigmoid(u) * e.score);
        bool pos = std::binary_search(positives.begin(), positives.end(), e.label);
        fwd.truth.push_back(pos ? 1 : 0);
    }

    fwd.loss.lambda = config.lambda;
    fwd.loss.classification = classification_loss(fwd.final_p, fwd.truth);

    if (training && !positives.empty()) {
        fwd.positive_yhat.reserve(positives.size());
        for (uint32_t l : positives) {
            auto it = std::lower_bound(
                fwd.shortlist.reached.begin(), fwd.shortlist.reached.end(), l,
                [](const ShortlistEntry& e, uint32_t lbl) { return e.label < lbl; });
            if (it == fwd.shortlist.reached.end() || it->label != l)
                throw std::runtime_error("forward: positive label " + std::to_string(l) +
                                         " missing from path set");
            fwd.positive_yhat.push_back(it->score);
        }
        fwd.loss.shortlisting = shortlist_loss(fwd.positive_yhat);
    }
    return fwd;
}

void backward_point(const ModelParams& model, const TrainConfig& config, const SparseVector& x,
                    const PointForward& fwd, Gradients& grads) {
    const AdjacencyMatrix& adj = model.adjacency;
    size_t dim = fwd.phi.size();
    uint32_t num_clusters = static_cast<uint32_t>(model.cluster_classifiers.rows());

    std::vector<double> d_phi(dim, 0.0);
    std::vector<double> g_shat(num_clusters, 0.0);

    // per selected cluster: gradient on the edge scores of its row
    const std::vector<uint32_t>& selected = fwd.shortlist.clusters;
    std::vector<std::vector<double>> g_edge(selected.size());
    std::vector<std::vector<double>> edge(selected.size());  // s_{c,l} values
    auto cluster_slot = [&](uint32_t c) {
        return static_cast<size_t>(
            std::lower_bound(selected.begin(), selected.end(), c) - selected.begin());
    };
    for (size_t i = 0; i < selected.size(); ++i)
        edge[i] = edge_scores(adj, selected[i], config.beta);

    // route a yhat gradient through its argmax path
    auto route_yhat = [&](uint32_t label, uint32_t cluster, double g) {
        size_t slot = cluster_slot(cluster);
        const auto& ids = adj.row_labels[cluster];
        size_t pos = static_cast<size_t>(
            std::lower_bound(ids.begin(), ids.end(), label) - ids.begin());
        if (g_edge[slot].empty()) g_edge[slot].assign(ids.size(), 0.0);
        g_shat[cluster] += g * edge[slot][pos];
        g_edge[slot][pos] += g * fwd.shat[cluster];
    };

    // classification loss through p = sigmoid(u) * yhat
    for (size_t i = 0; i < fwd.shortlist.entries.size(); ++i) {
        const ShortlistEntry& e = fwd.shortlist.entries[i];
        double p = fwd.final_p[i];
        if (p <= kLogEps || p >= 1.0 - kLogEps) continue;  // clamped in the loss
        double g_p = fwd.truth[i] ? -1.0 / p : 1.0 / (1.0 - p);
        double sig = sigmoid(fwd.logits_label[i]);
        double g_u = g_p * e.score * sig * (1.0 - sig);
        axpy(g_u, fwd.phi.data(), grads.d_label.row(e.label), dim);
        axpy(g_u, model.label_classifiers.row(e.label), d_phi.data(), dim);
        route_yhat(e.label, e.cluster, g_p * sig);
    }

    // shortlist loss through yhat of each positive
    if (config.lambda != 0.0) {
        for (size_t i = 0; i < fwd.positives.size(); ++i) {
            double y = fwd.positive_yhat[i];
            if (y <= kLogEps) continue;
            auto it = std::lower_bound(
                fwd.shortlist.reached.begin(), fwd.shortlist.reached.end(), fwd.positives[i],
                [](const ShortlistEntry& e, uint32_t lbl) { return e.label < lbl; });
            route_yhat(it->label, it->cluster, -config.lambda / y);
        }
    }

    // edge softmax rows: s_{c,l} = min(1, beta * anorm_l)
    for (size_t i = 0; i < selected.size(); ++i) {
        if (g_edge[i].empty()) continue;
        uint32_t c = selected[i];
        std::vector<double> anorm = adj.row_softmax(c);
        double inner = 0.0;
        std::vector<double> h(anorm.size());
        for (size_t k = 0; k < anorm.size(); ++k) {
            bool clamped = config.beta * anorm[k] >= 1.0;
            h[k] = clamped ? 0.0 : g_edge[i][k] * config.beta;
            inner += h[k] * anorm[k];
        }
        for (size_t k = 0; k < anorm.size(); ++k)
            grads.d_adjacency[c][k] += anorm[k] * (h[k] - inner);
    }

    // cluster softmax: shat_c = min(1, alpha * softmax_c)
    {
        double inner = 0.0;
        std::vector<double> h(num_clusters, 0.0);
        for (uint32_t c = 0; c < num_clusters; ++c) {
            bool clamped = config.alpha * fwd.softmax[c] >= 1.0;
            h[c] = clamped ? 0.0 : g_shat[c] * config.alpha;
            inner += h[c] * fwd.softmax[c];
        }
        for (uint32_t c = 0; c < num_clusters; ++c) {
            double dz = fwd.softmax[c] * (h[c] - inner);
            if (dz == 0.0) continue;
            axpy(dz, fwd.phi.data(), grads.d_cluster.row(c), dim);
            axpy(dz, model.cluster_classifiers.row(c), d_phi.data(), dim);
        }
    }

    if (model.encoder.trainable()) {
        for (size_t k = 0; k < x.nnz(); ++k)
            axpy(x.values[k], d_phi.data(), grads.d_projection.row(x.indices[k]), dim);
    }
}

}  // namespace xmc
