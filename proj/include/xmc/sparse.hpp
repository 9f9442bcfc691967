#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xmc {

// Sorted index/value pairs; bag-of-words features and sparse score vectors.
struct SparseVector {
    std::vector<uint32_t> indices;
    std::vector<double> values;

    size_t nnz() const { return indices.size(); }

    void push(uint32_t i, double v) {
        indices.push_back(i);
        values.push_back(v);
    }

    // strictly increasing indices, finite values
    void validate() const {
        if (indices.size() != values.size())
            throw std::invalid_argument("SparseVector: index/value length mismatch");
        for (size_t i = 0; i < indices.size(); ++i) {
            if (i > 0 && indices[i] <= indices[i - 1])
                throw std::invalid_argument("SparseVector: indices not strictly increasing");
            if (!std::isfinite(values[i]))
                throw std::invalid_argument("SparseVector: non-finite value");
        }
    }

    double l2_norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }

    SparseVector scaled(double a) const {
        SparseVector out = *this;
        for (double& v : out.values) v *= a;
        return out;
    }
};

inline double dot(const SparseVector& x, const double* dense) {
    double s = 0.0;
    for (size_t i = 0; i < x.indices.size(); ++i) s += x.values[i] * dense[x.indices[i]];
    return s;
}

}  // namespace xmc
