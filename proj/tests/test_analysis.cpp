#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "xmc/analysis.hpp"
#include "xmc/index.hpp"
#include "xmc/rng.hpp"

#include "helpers.hpp"

using namespace xmc;

namespace {

AdjacencyMatrix two_row() {
    AdjacencyMatrix a;
    a.num_clusters = 2;
    a.num_labels = 4;
    a.kappa = 2;
    a.row_labels = {{0, 1}, {2, 3}};
    // row 0 softmax: (0.6, 0.4) approx via logits log(3), log(2)
    a.row_weights = {{std::log(3.0), std::log(2.0)}, {0.0, 0.0}};
    return a;
}

}  // namespace

TEST_CASE("threshold pruning: identity at 0, drops scores below t") {
    AdjacencyMatrix a = two_row();
    PruneResult r0 = prune_threshold(a, 0.5, 0.0);  // beta=0.5: scores (0.3,0.2), (0.25,0.25)
    CHECK(r0.adjacency.row_labels == a.row_labels);
    CHECK(r0.pruned_fraction == doctest::Approx(0.0));
    CHECK(r0.orphaned_labels.empty());

    PruneResult r = prune_threshold(a, 0.5, 0.25);
    CHECK(r.adjacency.row_labels[0] == std::vector<uint32_t>{0});  // keeps 0.3 only
    CHECK(r.adjacency.row_labels[1] == std::vector<uint32_t>{2, 3});  // 0.25 >= t kept
    CHECK(r.pruned_fraction == doctest::Approx(0.25));
    CHECK(r.orphaned_labels == std::vector<uint32_t>{1});
}

TEST_CASE("pruned fraction is non-decreasing in the threshold") {
    Rng rng(3);
    AdjacencyMatrix a = testutil::random_adjacency(rng, 6, 60, 15);
    double last = -1.0;
    for (double t : {0.0, 0.01, 0.1, 0.25, 0.5, 0.9}) {
        PruneResult r = prune_threshold(a, 150.0, t);
        CHECK(r.pruned_fraction >= last);
        last = r.pruned_fraction;
        // decision is taken against the unpruned rows
        auto edges = testutil::ref_edge_matrix(a, 150.0);
        size_t kept = 0;
        for (uint32_t c = 0; c < a.num_clusters; ++c)
            for (uint32_t l : a.row_labels[c])
                if (edges[c][l] >= t) ++kept;
        CHECK(r.adjacency.num_edges() == kept);
    }
}

TEST_CASE("top-k pruning: identity at kappa, single entry at 1, sort oracle") {
    Rng rng(5);
    AdjacencyMatrix a = testutil::random_adjacency(rng, 4, 40, 10);
    AdjacencyMatrix same = prune_topk(a, a.kappa);
    CHECK(same.row_labels == a.row_labels);
    CHECK(same.row_weights == a.row_weights);

    AdjacencyMatrix one = prune_topk(a, 1);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        REQUIRE(one.row_labels[c].size() == 1);
        // kept entry is the max-weight one, ties toward the lower label id
        double best = one.row_weights[c][0];
        for (size_t k = 0; k < a.row_weights[c].size(); ++k) {
            CHECK(best >= a.row_weights[c][k]);
            if (a.row_weights[c][k] == best) {
                CHECK(one.row_labels[c][0] <= a.row_labels[c][k]);
                break;
            }
        }
    }

    for (uint32_t k : {2u, 5u, 8u}) {
        AdjacencyMatrix pk = prune_topk(a, k);
        for (uint32_t c = 0; c < a.num_clusters; ++c) {
            // oracle: sort (weight desc, label asc), take k, re-sort by label
            std::vector<std::pair<double, uint32_t>> all;
            for (size_t i = 0; i < a.row_labels[c].size(); ++i)
                all.push_back({a.row_weights[c][i], a.row_labels[c][i]});
            std::sort(all.begin(), all.end(), [](auto& x, auto& y) {
                if (x.first != y.first) return x.first > y.first;
                return x.second < y.second;
            });
            all.resize(std::min<size_t>(k, all.size()));
            std::vector<uint32_t> expect;
            for (auto& [w, l] : all) expect.push_back(l);
            std::sort(expect.begin(), expect.end());
            CHECK(pk.row_labels[c] == expect);
        }
    }
}

TEST_CASE("edge stats: uniform rows flat, single-hot rows a delta") {
    AdjacencyMatrix uni;
    uni.num_clusters = 2;
    uni.num_labels = 4;
    uni.kappa = 4;
    uni.row_labels = {{0, 1, 2, 3}, {0, 1, 2, 3}};
    uni.row_weights = {{1, 1, 1, 1}, {1, 1, 1, 1}};
    EdgeStats s = edge_stats(uni, 1.0, {10, 10, 10, 10});
    REQUIRE(s.mean_sorted_profile.size() == 4);
    for (double v : s.mean_sorted_profile) CHECK(v == doctest::Approx(0.25));

    AdjacencyMatrix hot = uni;
    hot.row_weights = {{50, 0, 0, 0}, {0, 50, 0, 0}};
    EdgeStats sh = edge_stats(hot, 1.0, {10, 10, 10, 10});
    CHECK(sh.mean_sorted_profile[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sh.mean_sorted_profile[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("edge stats match a naive computation on random rows") {
    Rng rng(7);
    AdjacencyMatrix a = testutil::random_adjacency(rng, 5, 50, 12);
    std::vector<uint32_t> freq(50);
    for (auto& f : freq) f = static_cast<uint32_t>(rng.next_below(100));
    const double beta = 10.0;
    EdgeStats s = edge_stats(a, beta, freq);

    // profile: mean over rows of descending-sorted softmax
    size_t max_len = 0;
    for (auto& r : a.row_weights) max_len = std::max(max_len, r.size());
    std::vector<double> acc(max_len, 0.0);
    std::vector<uint32_t> cnt(max_len, 0);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        std::vector<double> sm = testutil::ref_softmax(a.row_weights[c]);
        std::sort(sm.begin(), sm.end(), std::greater<double>());
        for (size_t i = 0; i < sm.size(); ++i) {
            acc[i] += sm[i];
            cnt[i]++;
        }
    }
    REQUIRE(s.mean_sorted_profile.size() == max_len);
    for (size_t i = 0; i < max_len; ++i) {
        CHECK(s.profile_counts[i] == cnt[i]);
        CHECK(s.mean_sorted_profile[i] == doctest::Approx(acc[i] / cnt[i]).epsilon(1e-9));
    }

    // clusters-per-label at the assignment threshold, via the dense oracle
    auto edges = testutil::ref_edge_matrix(a, beta);
    std::vector<uint32_t> got = clusters_per_label(a, beta, 0.25);
    for (uint32_t l = 0; l < 50; ++l) {
        uint32_t n = 0;
        for (uint32_t c = 0; c < 5; ++c)
            if (edges[c][l] > 0.25) ++n;
        CHECK(got[l] == n);
    }
}
