#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "xmc/dataset.hpp"
#include "xmc/metrics.hpp"
#include "xmc/model.hpp"

namespace xmc {

struct TrainTrace {
    std::vector<double> epoch_loss;  // mean total loss per epoch
};

// Random parameter init for a fresh model (stage 1 entry point).
ModelParams init_model(const Dataset& ds, const TrainConfig& config, EncoderMode mode,
                       uint32_t encoder_dim, uint64_t seed);

// Stage 1: A fixed to the balanced partition, trains encoder + cluster and
// label classifiers. Deterministic under seed. Divergence (non-finite loss)
// stops training and marks the checkpoint.
Checkpoint train_stage1(const Dataset& ds, const TrainConfig& config, const Partition& partition,
                        ModelParams initial, TrainTrace* trace = nullptr);

// Stage 2: joint training of all four groups; the adjacency support is frozen.
Checkpoint train_stage2(const Checkpoint& stage1, const AdjacencyMatrix& initialized,
                        const Dataset& ds, TrainTrace* trace = nullptr);

// Full pipeline for one seed: cluster, stage 1, adjacency init, stage 2.
Checkpoint train_full(const Dataset& ds, TrainConfig config, EncoderMode mode,
                      uint32_t encoder_dim);

// Independent runs differing only in the clustering/init seed.
std::vector<Checkpoint> train_ensemble(const Dataset& ds, const TrainConfig& config,
                                       EncoderMode mode, uint32_t encoder_dim,
                                       const std::vector<uint64_t>& seeds);

// Beam-search inference; top_k = 0 uses config.shortlist_k.
Predictions predict(const ModelParams& model, const TrainConfig& config, const Dataset& ds,
                    uint32_t top_k = 0, unsigned threads = 1, size_t* scored_paths = nullptr);

}  // namespace xmc
