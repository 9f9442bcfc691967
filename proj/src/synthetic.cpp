#include "xmc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xmc/rng.hpp"

namespace xmc {

namespace {

Dataset generate_points(const SyntheticSpec& spec,
                        const std::vector<std::vector<uint32_t>>& region_labels, uint32_t n,
                        Rng& rng) {
    Dataset ds;
    ds.num_points = n;
    ds.num_features = spec.num_regions * spec.features_per_region;
    ds.num_labels = spec.num_labels;
    ds.label_indptr.push_back(0);
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t r = static_cast<uint32_t>(rng.next_below(spec.num_regions));

        SparseVector x;
        for (uint32_t j = 0; j < spec.features_per_region; ++j)
            x.push(r * spec.features_per_region + j, 1.0 + spec.noise * rng.next_gaussian());
        // background activation outside the region block
        for (int j = 0; j < 2; ++j) {
            uint32_t f = static_cast<uint32_t>(rng.next_below(ds.num_features));
            if (f / spec.features_per_region == r) continue;
            x.push(f, spec.noise * (1.0 + rng.next_gaussian()));
        }
        std::vector<size_t> perm(x.nnz());
        for (size_t k = 0; k < perm.size(); ++k) perm[k] = k;
        std::sort(perm.begin(), perm.end(),
                  [&](size_t a, size_t b) { return x.indices[a] < x.indices[b]; });
        SparseVector xs;
        for (size_t k = 0; k < perm.size(); ++k) {
            if (!xs.indices.empty() && xs.indices.back() == x.indices[perm[k]]) continue;
            xs.push(x.indices[perm[k]], x.values[perm[k]]);
        }
        ds.features.push_back(std::move(xs));

        const std::vector<uint32_t>& pool = region_labels[r];
        std::vector<uint32_t> labels;
        uint32_t want = std::min<uint32_t>(spec.labels_per_point, (uint32_t)pool.size());
        while (labels.size() < want) {
            uint32_t l = pool[rng.next_below(pool.size())];
            if (std::find(labels.begin(), labels.end(), l) == labels.end())
                labels.push_back(l);
        }
        std::sort(labels.begin(), labels.end());
        ds.label_ids.insert(ds.label_ids.end(), labels.begin(), labels.end());
        ds.label_indptr.push_back(static_cast<uint32_t>(ds.label_ids.size()));
    }
    ds.validate();
    return ds;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    if (spec.num_regions == 0 || spec.num_labels < spec.num_regions)
        throw std::invalid_argument("make_synthetic: need at least one label per region");

    SyntheticData out;
    out.bimodal.assign(spec.num_labels, 0);

    // primary mode round-robin over regions; every k-th label gets a second
    // mode on the opposite side of the region ring
    uint32_t period = spec.bimodal_fraction > 0.0
                          ? std::max<uint32_t>(1, (uint32_t)std::lround(1.0 / spec.bimodal_fraction))
                          : 0;
    std::vector<std::vector<uint32_t>> region_labels(spec.num_regions);
    for (uint32_t l = 0; l < spec.num_labels; ++l) {
        uint32_t primary = l % spec.num_regions;
        region_labels[primary].push_back(l);
        if (period && l % period == 0) {
            out.bimodal[l] = 1;
            uint32_t secondary = (primary + spec.num_regions / 2) % spec.num_regions;
            region_labels[secondary].push_back(l);
        }
    }
    for (auto& pool : region_labels) std::sort(pool.begin(), pool.end());

    Rng rng(spec.seed);
    Rng train_rng = rng.fork(11);
    Rng test_rng = rng.fork(22);
    out.train = generate_points(spec, region_labels, spec.train_points, train_rng);
    out.test = generate_points(spec, region_labels, spec.test_points, test_rng);
    return out;
}

}  // namespace xmc
