#include "xmc/optimizer.hpp"

#include <cmath>

namespace xmc {

AdamW::AdamW(const ModelParams& model, const TrainConfig& config) {
    AdamWOptions enc{config.lr_encoder};
    enc.weight_decay = config.weight_decay;
    AdamWOptions mat{config.lr_classifiers};
    mat.weight_decay = config.weight_decay;
    AdamWOptions lbl = mat;
    lbl.accum_period = config.label_grad_accum;
    // adjacency weights are softmax logits, closest in kind to gains: no decay
    AdamWOptions adjw{config.lr_classifiers};
    adjw.weight_decay = 0.0;

    projection_.init(model.encoder.projection.data().size(), enc);
    cluster_.init(model.cluster_classifiers.data().size(), mat);
    label_.init(model.label_classifiers.data().size(), lbl);

    size_t total = 0;
    adjacency_offsets_.push_back(0);
    for (const auto& row : model.adjacency.row_weights) {
        total += row.size();
        adjacency_offsets_.push_back(total);
    }
    adjacency_.init(total, adjw);
}

void AdamW::GroupState::apply(double* params, const double* grads, size_t n, uint64_t /*step*/) {
    for (size_t i = 0; i < n; ++i) accum[i] += grads[i];
    if (++updates % opts.accum_period != 0) return;

    uint64_t t = updates / opts.accum_period;
    double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(t));
    for (size_t i = 0; i < n; ++i) {
        double g = accum[i];
        m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g;
        v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g * g;
        double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + opts.eps);
        params[i] -= opts.lr * (update + opts.weight_decay * params[i]);
        accum[i] = 0.0;
    }
}

void AdamW::step(ModelParams& model, const Gradients& grads) {
    ++step_count_;
    if (model.encoder.trainable())
        projection_.apply(model.encoder.projection.data().data(),
                          grads.d_projection.data().data(),
                          grads.d_projection.data().size(), step_count_);
    cluster_.apply(model.cluster_classifiers.data().data(), grads.d_cluster.data().data(),
                   grads.d_cluster.data().size(), step_count_);
    label_.apply(model.label_classifiers.data().data(), grads.d_label.data().data(),
                 grads.d_label.data().size(), step_count_);

    // flatten ragged adjacency grads against the fixed support
    for (uint32_t c = 0; c < model.adjacency.num_clusters; ++c) {
        size_t off = adjacency_offsets_[c];
        size_t n = grads.d_adjacency[c].size();
        for (size_t k = 0; k < n; ++k) adjacency_.accum[off + k] += grads.d_adjacency[c][k];
    }
    if (++adjacency_.updates % adjacency_.opts.accum_period == 0) {
        uint64_t t = adjacency_.updates;
        double bc1 = 1.0 - std::pow(adjacency_.opts.beta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(adjacency_.opts.beta2, static_cast<double>(t));
        for (uint32_t c = 0; c < model.adjacency.num_clusters; ++c) {
            size_t off = adjacency_offsets_[c];
            auto& w = model.adjacency.row_weights[c];
            for (size_t k = 0; k < w.size(); ++k) {
                size_t i = off + k;
                double g = adjacency_.accum[i];
                adjacency_.m[i] =
                    adjacency_.opts.beta1 * adjacency_.m[i] + (1.0 - adjacency_.opts.beta1) * g;
                adjacency_.v[i] = adjacency_.opts.beta2 * adjacency_.v[i] +
                                  (1.0 - adjacency_.opts.beta2) * g * g;
                double update = (adjacency_.m[i] / bc1) /
                                (std::sqrt(adjacency_.v[i] / bc2) + adjacency_.opts.eps);
                w[k] -= adjacency_.opts.lr * update;
                adjacency_.accum[i] = 0.0;
            }
        }
    }
}

}  // namespace xmc
