#include "xmc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "xmc/rng.hpp"

namespace xmc {

std::vector<std::vector<uint32_t>> Partition::members() const {
    std::vector<std::vector<uint32_t>> out(num_clusters);
    for (uint32_t l = 0; l < assignment.size(); ++l) out[assignment[l]].push_back(l);
    return out;
}

Matrix label_centroids(const Dataset& ds, const std::vector<StaticRep>& reps,
                       std::vector<uint32_t>* zero_rows) {
    size_t dim = ds.num_features + (reps.empty() ? 0 : reps[0].dense.size());
    Matrix centroids(ds.num_labels, dim);
    for (uint32_t i = 0; i < ds.num_points; ++i) {
        const StaticRep& r = reps[i];
        for (size_t p = ds.label_indptr[i]; p < ds.label_indptr[i + 1]; ++p) {
            double* mu = centroids.row(ds.label_ids[p]);
            for (size_t k = 0; k < r.bow.nnz(); ++k) mu[r.bow.indices[k]] += r.bow.values[k];
            axpy(1.0, r.dense.data(), mu + ds.num_features, r.dense.size());
        }
    }
    for (uint32_t l = 0; l < ds.num_labels; ++l) {
        double n = l2_norm(centroids.row(l), dim);
        if (n > 1e-12) {
            for (size_t j = 0; j < dim; ++j) centroids.row(l)[j] /= n;
        } else {
            std::fill(centroids.row(l), centroids.row(l) + dim, 0.0);
            if (zero_rows) zero_rows->push_back(l);
        }
    }
    return centroids;
}

namespace {

void update_centroid(const Matrix& data, const std::vector<uint32_t>& ids, double* centroid) {
    size_t dim = data.cols();
    std::vector<double> mean(dim, 0.0);
    for (uint32_t id : ids) axpy(1.0, data.row(id), mean.data(), dim);
    double n = l2_norm(mean.data(), dim);
    if (n > 1e-12)
        for (size_t j = 0; j < dim; ++j) centroid[j] = mean[j] / n;
    // zero mean: keep previous centroid
}

}  // namespace

void balanced_2means(const Matrix& data, const std::vector<uint32_t>& points, uint64_t seed,
                     std::vector<uint32_t>& half_a, std::vector<uint32_t>& half_b,
                     int max_iters, std::vector<double>* objective_trace) {
    size_t n = points.size();
    if (n < 2) throw std::invalid_argument("balanced_2means: need at least 2 points");
    size_t dim = data.cols();
    size_t size_a = (n + 1) / 2;

    // single run from one initial centroid pair; returns the final objective
    auto run_once = [&](size_t i0, size_t i1, std::vector<uint32_t>& out_a,
                        std::vector<uint32_t>& out_b, std::vector<double>& trace) {
        std::vector<double> ca(data.row(points[i0]), data.row(points[i0]) + dim);
        std::vector<double> cb(data.row(points[i1]), data.row(points[i1]) + dim);
        std::vector<std::pair<double, uint32_t>> ranked(n);
        std::vector<uint32_t> prev_a;
        double obj = 0.0;
        for (int iter = 0; iter < max_iters; ++iter) {
            for (size_t i = 0; i < n; ++i) {
                const double* x = data.row(points[i]);
                ranked[i] = {dot(x, cb.data(), dim) - dot(x, ca.data(), dim), points[i]};
            }
            // ascending: the size_a most A-leaning points first; median ties to lower id
            std::sort(ranked.begin(), ranked.end());
            out_a.clear();
            out_b.clear();
            for (size_t i = 0; i < n; ++i)
                (i < size_a ? out_a : out_b).push_back(ranked[i].second);
            std::sort(out_a.begin(), out_a.end());
            std::sort(out_b.begin(), out_b.end());

            update_centroid(data, out_a, ca.data());
            update_centroid(data, out_b, cb.data());

            obj = 0.0;
            for (uint32_t id : out_a) obj += dot(data.row(id), ca.data(), dim);
            for (uint32_t id : out_b) obj += dot(data.row(id), cb.data(), dim);
            trace.push_back(obj);

            if (out_a == prev_a) break;
            prev_a = out_a;
        }
        return obj;
    };

    // a single random init can stick in a poor local optimum; restart from a
    // few seeded pairs and keep the best final objective (first wins ties)
    const int restarts = 4;
    Rng rng(seed);
    double best = 0.0;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        size_t i0 = rng.next_below(n);
        size_t i1 = rng.next_below(n - 1);
        if (i1 >= i0) ++i1;
        std::vector<uint32_t> a, b;
        std::vector<double> trace;
        double obj = run_once(i0, i1, a, b, trace);
        if (!have || obj > best) {
            have = true;
            best = obj;
            half_a = std::move(a);
            half_b = std::move(b);
            if (objective_trace) *objective_trace = std::move(trace);
        }
    }
}

namespace {

void split_recursive(const Matrix& centroids, std::vector<uint32_t>& labels, uint32_t depth,
                     uint32_t first_cluster, const Rng& rng, std::vector<uint32_t>& assignment) {
    if (depth == 0) {
        for (uint32_t l : labels) assignment[l] = first_cluster;
        return;
    }
    std::vector<uint32_t> a, b;
    balanced_2means(centroids, labels, rng.fork(first_cluster).next_u64(), a, b);
    uint32_t half = 1u << (depth - 1);
    split_recursive(centroids, a, depth - 1, first_cluster, rng, assignment);
    split_recursive(centroids, b, depth - 1, first_cluster + half, rng, assignment);
}

}  // namespace

Partition build_partition(const Matrix& centroids, uint32_t num_clusters, uint64_t seed) {
    uint32_t num_labels = static_cast<uint32_t>(centroids.rows());
    if (num_clusters == 0 || (num_clusters & (num_clusters - 1)) != 0)
        throw std::invalid_argument("build_partition: C must be a power of two");
    if (num_clusters > num_labels)
        throw std::invalid_argument("build_partition: C must be <= L");

    // labels with zero centroid carry no geometry; attach them round-robin at the end
    std::vector<uint32_t> active, zero;
    for (uint32_t l = 0; l < num_labels; ++l) {
        if (l2_norm(centroids.row(l), centroids.cols()) > 1e-12) active.push_back(l);
        else zero.push_back(l);
    }

    Partition part;
    part.num_clusters = num_clusters;
    part.assignment.assign(num_labels, 0);

    uint32_t depth = 0;
    while ((1u << depth) < num_clusters) ++depth;

    if (active.size() < num_clusters) {
        // not enough labels with geometry; fall back to round-robin over everything
        active.insert(active.end(), zero.begin(), zero.end());
        zero.clear();
        std::sort(active.begin(), active.end());
        for (uint32_t i = 0; i < active.size(); ++i)
            part.assignment[active[i]] = i % num_clusters;
        return part;
    }

    Rng rng(seed);
    split_recursive(centroids, active, depth, 0, rng, part.assignment);
    for (uint32_t i = 0; i < zero.size(); ++i) part.assignment[zero[i]] = i % num_clusters;
    return part;
}

Partition load_partition(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open partition file: " + path);
    uint32_t l = 0, c = 0;
    in.read(reinterpret_cast<char*>(&l), 4);
    in.read(reinterpret_cast<char*>(&c), 4);
    Partition p;
    p.num_clusters = c;
    p.assignment.resize(l);
    in.read(reinterpret_cast<char*>(p.assignment.data()), 4ull * l);
    if (!in) throw std::runtime_error("partition file truncated: " + path);
    return p;
}

void save_partition(const Partition& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    uint32_t l = static_cast<uint32_t>(p.assignment.size()), c = p.num_clusters;
    out.write(reinterpret_cast<const char*>(&l), 4);
    out.write(reinterpret_cast<const char*>(&c), 4);
    out.write(reinterpret_cast<const char*>(p.assignment.data()), 4ull * l);
}

}  // namespace xmc
