#pragma once

#include <cstdint>
#include <vector>

#include "xmc/dataset.hpp"

namespace xmc {

// Benchmark generator: points live in `num_regions` feature-space regions;
// a fraction of the labels is planted with two modes (two regions), the rest
// with one. Region structure is what a cluster index should recover.
struct SyntheticSpec {
    uint32_t num_labels = 2000;
    uint32_t num_regions = 32;
    uint32_t features_per_region = 4;  // num_features = num_regions * this
    uint32_t train_points = 6000;
    uint32_t test_points = 2000;
    uint32_t labels_per_point = 5;
    double bimodal_fraction = 0.2;
    double noise = 0.1;
    uint64_t seed = 0;
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    std::vector<uint8_t> bimodal;  // per label
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace xmc
