#include "xmc/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xmc/grad.hpp"
#include "xmc/index.hpp"
#include "xmc/optimizer.hpp"
#include "xmc/rng.hpp"
#include "xmc/threads.hpp"

namespace xmc {

ModelParams init_model(const Dataset& ds, const TrainConfig& config, EncoderMode mode,
                       uint32_t encoder_dim, uint64_t seed) {
    ModelParams model;
    model.encoder.mode = mode;
    model.encoder.dim = encoder_dim;
    Rng rng(seed);
    if (mode == EncoderMode::Linear) {
        model.encoder.projection = Matrix(ds.num_features, encoder_dim);
        double scale = 1.0 / std::sqrt(static_cast<double>(ds.num_features));
        for (double& v : model.encoder.projection.data()) v = scale * rng.next_gaussian();
    }
    model.cluster_classifiers = Matrix(config.num_clusters, encoder_dim);
    for (double& v : model.cluster_classifiers.data()) v = 0.01 * rng.next_gaussian();
    model.label_classifiers = Matrix(ds.num_labels, encoder_dim);
    return model;
}

namespace {

// One pass over the data; returns mean total loss, or NaN on divergence.
double run_epoch(ModelParams& model, const TrainConfig& config, const Dataset& ds,
                 AdamW& optimizer, Gradients& grads, Rng& order_rng, bool adjacency_learnable) {
    std::vector<uint32_t> order(ds.num_points);
    for (uint32_t i = 0; i < ds.num_points; ++i) order[i] = i;
    order_rng.shuffle(order);

    AdjacencyMatrix::ColumnIndex col_index = model.adjacency.build_column_index();

    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        size_t end = std::min(order.size(), begin + config.batch_size);
        grads.zero();
        for (size_t i = begin; i < end; ++i) {
            uint32_t p = order[i];
            PointForward fwd = forward_point(model, config, ds.features[p], ds.labels_of(p), p,
                                             /*training=*/true, &col_index);
            backward_point(model, config, ds.features[p], fwd, grads);
            loss_sum += fwd.loss.total();
            ++loss_count;
        }
        if (!std::isfinite(loss_sum)) return std::nan("");
        grads.scale(1.0 / static_cast<double>(end - begin));
        if (const char* group = grads.find_non_finite())
            throw std::runtime_error(std::string("non-finite gradient in group ") + group);
        optimizer.step(model, grads);
        // parent selection tracks the learned weights
        if (adjacency_learnable) col_index = model.adjacency.build_column_index();
    }
    return loss_sum / static_cast<double>(loss_count);
}

Checkpoint run_stage(ModelParams model, const TrainConfig& config, const Dataset& ds,
                     const Partition& partition, Stage stage, uint32_t epochs,
                     TrainTrace* trace) {
    Checkpoint ck;
    ck.config = config;
    ck.partition = partition;
    ck.stage = stage;

    bool learn_adjacency = stage == Stage::Two;
    AdamW optimizer(model, config);
    Gradients grads = Gradients::zeros_like(model);
    Rng order_rng = Rng(config.seed).fork(stage == Stage::Two ? 2 : 1);

    for (uint32_t e = 0; e < epochs; ++e) {
        double mean_loss =
            run_epoch(model, config, ds, optimizer, grads, order_rng, learn_adjacency);
        if (trace) trace->epoch_loss.push_back(mean_loss);
        if (!std::isfinite(mean_loss)) {
            ck.diverged = true;
            break;
        }
    }
    ck.model = std::move(model);
    return ck;
}

}  // namespace

Checkpoint train_stage1(const Dataset& ds, const TrainConfig& config, const Partition& partition,
                        ModelParams initial, TrainTrace* trace) {
    initial.adjacency = adjacency_from_partition(partition);
    return run_stage(std::move(initial), config, ds, partition, Stage::One,
                     config.stage1_epochs, trace);
}

Checkpoint train_stage2(const Checkpoint& stage1, const AdjacencyMatrix& initialized,
                        const Dataset& ds, TrainTrace* trace) {
    ModelParams model = stage1.model;
    model.adjacency = initialized;
    model.adjacency.validate();
    return run_stage(std::move(model), stage1.config, ds, stage1.partition, Stage::Two,
                     stage1.config.stage2_epochs, trace);
}

Checkpoint train_full(const Dataset& ds, TrainConfig config, EncoderMode mode,
                      uint32_t encoder_dim) {
    if (config.num_clusters == 0)
        throw std::invalid_argument("train_full: num_clusters must be set");
    if (config.kappa == 0)
        config.kappa = std::max<uint32_t>(
            1, 10u * ds.num_labels / config.num_clusters);

    ModelParams model = init_model(ds, config, mode, encoder_dim, config.seed);

    std::vector<StaticRep> reps(ds.num_points);
    for (uint32_t i = 0; i < ds.num_points; ++i)
        reps[i] = static_rep(ds.features[i], encode(model.encoder, ds.features[i], i));
    Matrix centroids = label_centroids(ds, reps);
    Partition partition = build_partition(centroids, config.num_clusters, config.seed);

    Checkpoint s1 = train_stage1(ds, config, partition, std::move(model));
    if (s1.diverged) return s1;

    AdjacencyMatrix adj =
        init_adjacency(s1.model.encoder, s1.model.cluster_classifiers, config.alpha, ds,
                       config.beam, config.kappa, partition, config.seed);
    return train_stage2(s1, adj, ds);
}

std::vector<Checkpoint> train_ensemble(const Dataset& ds, const TrainConfig& config,
                                       EncoderMode mode, uint32_t encoder_dim,
                                       const std::vector<uint64_t>& seeds) {
    std::vector<Checkpoint> out;
    for (uint64_t seed : seeds) {
        TrainConfig c = config;
        c.seed = seed;
        out.push_back(train_full(ds, c, mode, encoder_dim));
    }
    return out;
}

Predictions predict(const ModelParams& model, const TrainConfig& config, const Dataset& ds,
                    uint32_t top_k, unsigned threads, size_t* scored_paths) {
    uint32_t k = top_k ? top_k : config.shortlist_k;
    Predictions preds(ds.num_points);
    std::vector<size_t> paths(ds.num_points, 0);
    parallel_for(ds.num_points, threads, [&](size_t i) {
        uint32_t p = static_cast<uint32_t>(i);
        PointForward fwd = forward_point(model, config, ds.features[p], {}, p,
                                         /*training=*/false, nullptr);
        RankedPrediction rp;
        for (size_t j = 0; j < fwd.shortlist.entries.size(); ++j) {
            rp.labels.push_back(fwd.shortlist.entries[j].label);
            rp.scores.push_back(fwd.final_p[j]);
        }
        sort_ranked(rp);
        if (rp.labels.size() > k) {
            rp.labels.resize(k);
            rp.scores.resize(k);
        }
        preds[i] = std::move(rp);
        paths[i] = fwd.shortlist.scored_paths;
    });
    if (scored_paths) {
        size_t total = 0;
        for (size_t p : paths) total += p;
        *scored_paths = total;
    }
    return preds;
}

}  // namespace xmc
