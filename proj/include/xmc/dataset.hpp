#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xmc/sparse.hpp"

namespace xmc {

// N points with sparse features and an N x L binary label matrix in CSR form.
// Immutable after load; safe for concurrent readers.
struct Dataset {
    uint32_t num_points = 0;
    uint32_t num_features = 0;  // bag-of-words dimensionality
    uint32_t num_labels = 0;

    std::vector<SparseVector> features;
    std::vector<size_t> label_indptr;    // length num_points + 1
    std::vector<uint32_t> label_ids;     // sorted within each row

    std::vector<uint32_t> labels_of(uint32_t point) const {
        return {label_ids.begin() + label_indptr[point],
                label_ids.begin() + label_indptr[point + 1]};
    }
    size_t num_point_labels(uint32_t point) const {
        return label_indptr[point + 1] - label_indptr[point];
    }

    // per-label training frequency
    std::vector<uint32_t> label_frequencies() const;

    // points with zero labels (permitted but flagged)
    std::vector<uint32_t> empty_label_points() const;

    void validate() const;
};

struct PropensityModel {
    std::vector<double> propensities;  // in (0, 1]
    double param_a = 0.55;
    double param_b = 1.5;
};

// Text format: header "N D L"; per line "l1,l2,... f1:v1 f2:v2 ...".
// Empty label field is allowed (line starting with a space).
Dataset load_xmc_dataset(const std::string& path);
void write_xmc_dataset(const Dataset& ds, const std::string& path);

// Inverse-propensity model: p_l = 1 / (1 + C * exp(-a * log(n_l + b))),
// C = (log N - 1) * (b + 1)^a.
PropensityModel compute_propensities(const Dataset& ds, double a = 0.55, double b = 1.5);

// Deterministic disjoint split: (train of size N - n_val, validation of size n_val).
std::pair<Dataset, Dataset> split_validation(const Dataset& ds, uint32_t n_val, uint64_t seed);

// Subset by point ids, preserving order.
Dataset subset(const Dataset& ds, const std::vector<uint32_t>& points);

}  // namespace xmc
