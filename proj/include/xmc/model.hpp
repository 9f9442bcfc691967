#pragma once

#include <cstdint>
#include <string>

#include "xmc/adjacency.hpp"
#include "xmc/clustering.hpp"
#include "xmc/encoder.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

struct TrainConfig {
    double alpha = 10.0;
    double beta = 150.0;
    uint32_t kappa = 0;        // 0: default 10 * L / C at adjacency init
    double lambda = 0.05;
    uint32_t shortlist_k = 2000;
    uint32_t beam = 20;
    uint32_t num_clusters = 0;
    uint32_t stage1_epochs = 10;
    uint32_t stage2_epochs = 10;
    uint32_t batch_size = 32;
    uint64_t seed = 0;
    double lr_classifiers = 0.02;   // cluster/label classifiers and adjacency
    double lr_encoder = 1e-3;
    double weight_decay = 0.01;     // matrix groups only, not A
    uint32_t label_grad_accum = 1;  // accumulation period k for W_L
};

struct ModelParams {
    EncoderParams encoder;
    Matrix cluster_classifiers;  // C x D
    Matrix label_classifiers;    // L x D
    AdjacencyMatrix adjacency;
};

enum class Stage : uint32_t { One = 1, Two = 2 };

struct Checkpoint {
    ModelParams model;
    Partition partition;
    TrainConfig config;
    Stage stage = Stage::One;
    bool diverged = false;
};

// Single binary file: magic + JSON config header + raw parameter blobs.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace xmc
