#include "xmc/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace xmc {

AdjacencyMatrix::ColumnIndex AdjacencyMatrix::build_column_index() const {
    ColumnIndex idx;
    idx.cols.resize(num_labels);
    for (uint32_t c = 0; c < num_clusters; ++c)
        for (size_t k = 0; k < row_labels[c].size(); ++k)
            idx.cols[row_labels[c][k]].emplace_back(c, row_weights[c][k]);
    return idx;
}

uint32_t AdjacencyMatrix::parent_of(const ColumnIndex& idx, uint32_t label) {
    const auto& col = idx.cols[label];
    if (col.empty())
        throw std::runtime_error("adjacency: label " + std::to_string(label) +
                                 " has no incoming edge");
    uint32_t best = col[0].first;
    double best_w = col[0].second;
    for (size_t i = 1; i < col.size(); ++i)
        if (col[i].second > best_w) { best_w = col[i].second; best = col[i].first; }
    return best;
}

void AdjacencyMatrix::validate() const {
    if (row_labels.size() != num_clusters || row_weights.size() != num_clusters)
        throw std::invalid_argument("adjacency: row count mismatch");
    std::vector<uint8_t> covered(num_labels, 0);
    for (uint32_t c = 0; c < num_clusters; ++c) {
        const auto& ids = row_labels[c];
        if (ids.size() != row_weights[c].size())
            throw std::invalid_argument("adjacency: ragged row " + std::to_string(c));
        if (ids.size() > kappa)
            throw std::invalid_argument("adjacency: row " + std::to_string(c) +
                                        " exceeds kappa");
        for (size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] >= num_labels)
                throw std::out_of_range("adjacency: label index out of range");
            if (k > 0 && ids[k] <= ids[k - 1])
                throw std::invalid_argument("adjacency: row not strictly increasing");
            if (!std::isfinite(row_weights[c][k]))
                throw std::invalid_argument("adjacency: non-finite weight");
            covered[ids[k]] = 1;
        }
    }
    for (uint32_t l = 0; l < num_labels; ++l)
        if (!covered[l])
            throw std::invalid_argument("adjacency: label " + std::to_string(l) +
                                        " not covered by any row");
}

std::vector<double> AdjacencyMatrix::row_softmax(uint32_t c) const {
    const auto& w = row_weights[c];
    std::vector<double> out(w.size());
    if (w.empty()) return out;
    double m = *std::max_element(w.begin(), w.end());
    double z = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        out[k] = std::exp(w[k] - m);
        z += out[k];
    }
    for (double& v : out) v /= z;
    return out;
}

AdjacencyMatrix adjacency_from_partition(const Partition& p) {
    AdjacencyMatrix a;
    a.num_clusters = p.num_clusters;
    a.num_labels = static_cast<uint32_t>(p.assignment.size());
    a.row_labels.resize(a.num_clusters);
    a.row_weights.resize(a.num_clusters);
    for (uint32_t l = 0; l < a.num_labels; ++l)
        a.row_labels[p.assignment[l]].push_back(l);
    size_t max_row = 0;
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        max_row = std::max(max_row, a.row_labels[c].size());
        a.row_weights[c].assign(a.row_labels[c].size(), 0.0);
    }
    a.kappa = static_cast<uint32_t>(max_row);
    return a;
}

AdjacencyMatrix load_adjacency(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open adjacency file: " + path);
    AdjacencyMatrix a;
    in.read(reinterpret_cast<char*>(&a.num_clusters), 4);
    in.read(reinterpret_cast<char*>(&a.num_labels), 4);
    in.read(reinterpret_cast<char*>(&a.kappa), 4);
    if (!in) throw std::runtime_error("adjacency file: truncated header");
    a.row_labels.resize(a.num_clusters);
    a.row_weights.resize(a.num_clusters);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        uint32_t n = 0;
        in.read(reinterpret_cast<char*>(&n), 4);
        a.row_labels[c].resize(n);
        in.read(reinterpret_cast<char*>(a.row_labels[c].data()), 4ull * n);
        std::vector<float> w(n);
        in.read(reinterpret_cast<char*>(w.data()), 4ull * n);
        if (!in) throw std::runtime_error("adjacency file: truncated row");
        a.row_weights[c].assign(w.begin(), w.end());
    }
    return a;
}

void save_adjacency(const AdjacencyMatrix& a, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(&a.num_clusters), 4);
    out.write(reinterpret_cast<const char*>(&a.num_labels), 4);
    out.write(reinterpret_cast<const char*>(&a.kappa), 4);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        uint32_t n = static_cast<uint32_t>(a.row_labels[c].size());
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(a.row_labels[c].data()), 4ull * n);
        std::vector<float> w(a.row_weights[c].begin(), a.row_weights[c].end());
        out.write(reinterpret_cast<const char*>(w.data()), 4ull * n);
    }
}

}  // namespace xmc
