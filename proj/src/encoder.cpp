#include "xmc/encoder.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace xmc {

std::vector<double> encode(const EncoderParams& params, const SparseVector& x, uint32_t point) {
    std::vector<double> phi(params.dim, 0.0);
    if (params.mode == EncoderMode::Linear) {
        for (size_t k = 0; k < x.nnz(); ++k) {
            uint32_t i = x.indices[k];
            if (i >= params.projection.rows())
                throw std::out_of_range("encode: feature index out of range");
            axpy(x.values[k], params.projection.row(i), phi.data(), params.dim);
        }
    } else {
        if (point >= params.precomputed.rows())
            throw std::out_of_range("encode: missing precomputed embedding row");
        const double* row = params.precomputed.row(point);
        phi.assign(row, row + params.dim);
    }
    return phi;
}

StaticRep static_rep(const SparseVector& x, const std::vector<double>& phi_x) {
    StaticRep rep;
    double bn = x.l2_norm();
    if (bn > 0.0) {
        rep.bow = x.scaled(1.0 / bn);
    } else {
        rep.bow = x;
        rep.bow_zero = true;
    }
    double dn = l2_norm(phi_x.data(), phi_x.size());
    rep.dense = phi_x;
    if (dn > 0.0) {
        for (double& v : rep.dense) v /= dn;
    } else {
        rep.dense_zero = true;
    }
    return rep;
}

double static_rep_dot(const StaticRep& a, const StaticRep& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < a.bow.nnz() && j < b.bow.nnz()) {
        if (a.bow.indices[i] < b.bow.indices[j]) ++i;
        else if (a.bow.indices[i] > b.bow.indices[j]) ++j;
        else s += a.bow.values[i++] * b.bow.values[j++];
    }
    s += dot(a.dense.data(), b.dense.data(), a.dense.size());
    return s;
}

Matrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    uint32_t n = 0, d = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in) throw std::runtime_error("embeddings file: truncated header");
    Matrix m(n, d);
    std::vector<float> row(d);
    for (uint32_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), sizeof(float) * d);
        if (!in) throw std::runtime_error("embeddings file: truncated row " + std::to_string(i));
        for (uint32_t j = 0; j < d; ++j) m.at(i, j) = row[j];
    }
    return m;
}

void save_embeddings(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    uint32_t n = static_cast<uint32_t>(m.rows()), d = static_cast<uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    std::vector<float> row(d);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < d; ++j) row[j] = static_cast<float>(m.at(i, j));
        out.write(reinterpret_cast<const char*>(row.data()), sizeof(float) * d);
    }
}

}  // namespace xmc
