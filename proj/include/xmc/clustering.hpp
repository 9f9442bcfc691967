#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmc/dataset.hpp"
#include "xmc/encoder.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

// Total assignment of labels to C clusters (C a power of two); sizes differ
// by at most one at every recursion level.
struct Partition {
    std::vector<uint32_t> assignment;  // length L
    uint32_t num_clusters = 0;

    std::vector<std::vector<uint32_t>> members() const;
};

// mu_l = normalize(sum of static reps of positive points); zero centroid when
// a label has no positives (or the sum cancels), flagged in `zero_rows`.
Matrix label_centroids(const Dataset& ds, const std::vector<StaticRep>& reps,
                       std::vector<uint32_t>* zero_rows = nullptr);

// Balanced split of `points` (row ids into `data`) into two halves with
// |size difference| <= 1. Alternates assign/update; the assign step ranks
// points by (sim to centroid A - sim to centroid B) and splits at the median,
// ties broken by lower id.
void balanced_2means(const Matrix& data, const std::vector<uint32_t>& points, uint64_t seed,
                     std::vector<uint32_t>& half_a, std::vector<uint32_t>& half_b,
                     int max_iters = 50, std::vector<double>* objective_trace = nullptr);

// Recursive balanced 2-means to depth log2(C) over unit label centroids.
// Labels with zero centroid are distributed round-robin afterwards.
Partition build_partition(const Matrix& centroids, uint32_t num_clusters, uint64_t seed);

// Serialized as u32 L, u32 C header then L u32 cluster ids.
Partition load_partition(const std::string& path);
void save_partition(const Partition& p, const std::string& path);

}  // namespace xmc
