#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmc/matrix.hpp"
#include "xmc/sparse.hpp"

namespace xmc {

enum class EncoderMode { Precomputed, Linear };

// Input embedding phi(x): either a table of precomputed rows or a trainable
// linear projection of the sparse features.
struct EncoderParams {
    EncoderMode mode = EncoderMode::Linear;
    uint32_t dim = 64;
    Matrix projection;    // num_features x dim (linear mode)
    Matrix precomputed;   // n x dim (precomputed mode)

    bool trainable() const { return mode == EncoderMode::Linear; }
};

// Concatenation of L2-normalized bow and dense blocks; zero blocks pass
// through as zero and are flagged.
struct StaticRep {
    SparseVector bow;           // normalized, indices < num_features
    std::vector<double> dense;  // normalized, length dim
    bool bow_zero = false;
    bool dense_zero = false;
};

// phi(x): linear mode computes projection^T x, precomputed mode returns row `point`.
std::vector<double> encode(const EncoderParams& params, const SparseVector& x,
                           uint32_t point = UINT32_MAX);

StaticRep static_rep(const SparseVector& x, const std::vector<double>& phi_x);

// similarity between reps (both blocks contribute; combined dim = num_features + dim)
double static_rep_dot(const StaticRep& a, const StaticRep& b);

// Binary embeddings file: u32 N, u32 D header then row-major f32, little endian.
Matrix load_embeddings(const std::string& path);
void save_embeddings(const Matrix& m, const std::string& path);

}  // namespace xmc
