#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "xmc/clustering.hpp"
#include "xmc/rng.hpp"

using namespace xmc;

namespace {

// Rand index between two flat assignments
double rand_index(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    size_t n = a.size(), agree = 0, total = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            bool sa = a[i] == a[j], sb = b[i] == b[j];
            agree += (sa == sb);
            ++total;
        }
    return double(agree) / double(total);
}

Dataset two_point_dataset(uint32_t num_features) {
    Dataset ds;
    ds.num_points = 2;
    ds.num_features = num_features;
    ds.num_labels = 2;
    SparseVector f0, f1;
    f0.push(0, 1.0);
    f1.push(1, 1.0);
    ds.features = {f0, f1};
    ds.label_indptr = {0, 1, 2};
    ds.label_ids = {0, 1};
    return ds;
}

}  // namespace

TEST_CASE("label centroid of a single positive is the normalized rep") {
    Dataset ds = two_point_dataset(4);
    std::vector<StaticRep> reps(2);
    SparseVector bow;
    bow.push(0, 3.0);
    bow.push(2, 4.0);
    reps[0] = static_rep(bow, {1.0, 1.0});
    reps[1] = static_rep(ds.features[1], {0.5, 0.5});

    Matrix mu = label_centroids(ds, reps);
    // centroid of label 0 = psi(x0) normalized; psi already has norm sqrt(2)
    double n = std::sqrt(2.0);
    CHECK(mu.at(0, 0) == doctest::Approx(0.6 / n));
    CHECK(mu.at(0, 2) == doctest::Approx(0.8 / n));
    CHECK(mu.at(0, 4) == doctest::Approx((1.0 / std::sqrt(2.0)) / n));
    double norm = 0.0;
    for (size_t j = 0; j < mu.cols(); ++j) norm += mu.at(0, j) * mu.at(0, j);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("antipodal reps cancel to a flagged zero centroid") {
    Dataset ds;
    ds.num_points = 2;
    ds.num_features = 2;
    ds.num_labels = 1;
    SparseVector f0, f1;
    f0.push(0, 1.0);
    f1.push(0, -1.0);
    ds.features = {f0, f1};
    ds.label_indptr = {0, 1, 2};
    ds.label_ids = {0, 0};  // both points positive for label 0

    std::vector<StaticRep> reps = {static_rep(f0, {}), static_rep(f1, {})};
    std::vector<uint32_t> zero_rows;
    Matrix mu = label_centroids(ds, reps, &zero_rows);
    CHECK(zero_rows == std::vector<uint32_t>{0});
    for (size_t j = 0; j < mu.cols(); ++j) CHECK(mu.at(0, j) == 0.0);
}

TEST_CASE("label centroid matches naive accumulate-then-normalize") {
    Rng rng(4);
    const uint32_t n = 10, D_bow = 6, D = 3;
    Dataset ds;
    ds.num_points = n;
    ds.num_features = D_bow;
    ds.num_labels = 1;
    ds.label_indptr.push_back(0);
    std::vector<StaticRep> reps;
    std::vector<double> naive(D_bow + D, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        SparseVector f;
        for (uint32_t k = 0; k < D_bow; k += 2) f.push(k, rng.next_gaussian());
        std::vector<double> phi(D);
        for (double& v : phi) v = rng.next_gaussian();
        ds.features.push_back(f);
        ds.label_ids.push_back(0);
        ds.label_indptr.push_back(ds.label_ids.size());
        StaticRep r = static_rep(f, phi);
        reps.push_back(r);
        for (size_t k = 0; k < r.bow.nnz(); ++k) naive[r.bow.indices[k]] += r.bow.values[k];
        for (uint32_t d = 0; d < D; ++d) naive[D_bow + d] += r.dense[d];
    }
    double norm = std::sqrt(std::inner_product(naive.begin(), naive.end(), naive.begin(), 0.0));
    Matrix mu = label_centroids(ds, reps);
    for (size_t j = 0; j < D_bow + D; ++j)
        CHECK(mu.at(0, j) == doctest::Approx(naive[j] / norm).epsilon(1e-9));
}

TEST_CASE("balanced 2-means separates two obvious pairs") {
    Matrix data(4, 2);
    data.at(0, 0) = 1.0;
    data.at(1, 0) = 0.99;
    data.at(1, 1) = 0.1;
    data.at(2, 1) = 1.0;
    data.at(3, 0) = 0.1;
    data.at(3, 1) = 0.99;
    std::vector<uint32_t> a, b;
    balanced_2means(data, {0, 1, 2, 3}, 1, a, b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    bool ok = (a == std::vector<uint32_t>{0, 1} && b == std::vector<uint32_t>{2, 3}) ||
              (a == std::vector<uint32_t>{2, 3} && b == std::vector<uint32_t>{0, 1});
    CHECK(ok);
}

TEST_CASE("odd-count split is 3/2") {
    Rng rng(2);
    Matrix data(5, 3);
    for (double& v : data.data()) v = rng.next_gaussian();
    std::vector<uint32_t> a, b;
    balanced_2means(data, {0, 1, 2, 3, 4}, 3, a, b);
    CHECK(a.size() == 3);
    CHECK(b.size() == 2);
}

TEST_CASE("identical points still split deterministically and balanced") {
    Matrix data(4, 2);
    for (int i = 0; i < 4; ++i) data.at(i, 0) = 1.0;
    std::vector<uint32_t> a1, b1, a2, b2;
    balanced_2means(data, {0, 1, 2, 3}, 9, a1, b1);
    balanced_2means(data, {0, 1, 2, 3}, 9, a2, b2);
    CHECK(a1.size() == 2);
    CHECK(a1 == a2);
    CHECK(b1 == b2);
}

TEST_CASE("objective non-decreasing across iterations on 50 random instances") {
    for (int t = 0; t < 50; ++t) {
        Rng rng(100 + t);
        uint32_t n = 6 + static_cast<uint32_t>(rng.next_below(20));
        Matrix data(n, 4);
        for (double& v : data.data()) v = rng.next_gaussian();
        // normalize rows: similarity is the dot product on unit vectors
        for (uint32_t i = 0; i < n; ++i) {
            double s = l2_norm(data.row(i), 4);
            if (s > 0)
                for (int d = 0; d < 4; ++d) data.at(i, d) /= s;
        }
        std::vector<uint32_t> ids(n), a, b;
        std::iota(ids.begin(), ids.end(), 0);
        std::vector<double> trace;
        balanced_2means(data, ids, 7 * t + 1, a, b, 50, &trace);
        for (size_t i = 1; i < trace.size(); ++i)
            CHECK(trace[i] >= trace[i - 1] - 1e-9);
    }
}

TEST_CASE("full-depth partition gives singleton clusters") {
    Matrix centroids(8, 4);
    Rng rng(5);
    for (double& v : centroids.data()) v = rng.next_gaussian();
    Partition p = build_partition(centroids, 8, 1);
    std::vector<int> sizes(8, 0);
    for (uint32_t c : p.assignment) sizes[c]++;
    for (int s : sizes) CHECK(s == 1);
}

TEST_CASE("L=9 C=4 gives sizes {3,2,2,2}") {
    Matrix centroids(9, 4);
    Rng rng(6);
    for (double& v : centroids.data()) v = rng.next_gaussian();
    Partition p = build_partition(centroids, 4, 1);
    std::vector<int> sizes(4, 0);
    for (uint32_t c : p.assignment) sizes[c]++;
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{2, 2, 2, 3});
}

TEST_CASE("partition rejects bad cluster counts") {
    Matrix centroids(8, 2);
    CHECK_THROWS(build_partition(centroids, 3, 0));   // not a power of two
    CHECK_THROWS(build_partition(centroids, 16, 0));  // C > L
}

TEST_CASE("planted groups recovered with Rand index >= 0.95") {
    const uint32_t L = 64, C = 4;
    for (int seed = 0; seed < 10; ++seed) {
        Rng rng(300 + seed);
        Matrix centroids(L, 8);
        std::vector<uint32_t> planted(L);
        for (uint32_t l = 0; l < L; ++l) {
            uint32_t g = l % C;
            planted[l] = g;
            for (int d = 0; d < 8; ++d)
                centroids.at(l, d) = (d / 2 == (int)g ? 1.0 : 0.0) + 0.05 * rng.next_gaussian();
            double n = l2_norm(centroids.row(l), 8);
            for (int d = 0; d < 8; ++d) centroids.at(l, d) /= n;
        }
        Partition p = build_partition(centroids, C, seed);
        CHECK(rand_index(planted, p.assignment) >= 0.95);
    }
}

TEST_CASE("partition determinism and serialization round trip") {
    Matrix centroids(20, 4);
    Rng rng(7);
    for (double& v : centroids.data()) v = rng.next_gaussian();
    Partition p1 = build_partition(centroids, 4, 123);
    Partition p2 = build_partition(centroids, 4, 123);
    CHECK(p1.assignment == p2.assignment);

    save_partition(p1, "/tmp/xmc_test_part.bin");
    Partition back = load_partition("/tmp/xmc_test_part.bin");
    CHECK(back.num_clusters == p1.num_clusters);
    CHECK(back.assignment == p1.assignment);
}

TEST_CASE("zero-centroid labels distributed round robin") {
    Matrix centroids(8, 4);
    Rng rng(12);
    for (uint32_t l = 0; l < 6; ++l)
        for (int d = 0; d < 4; ++d) centroids.at(l, d) = rng.next_gaussian();
    // labels 6, 7 keep a zero centroid and are attached round-robin from cluster 0
    Partition p = build_partition(centroids, 4, 3);
    CHECK(p.assignment[6] == 0);
    CHECK(p.assignment[7] == 1);
    for (uint32_t c : p.assignment) CHECK(c < 4);
}
