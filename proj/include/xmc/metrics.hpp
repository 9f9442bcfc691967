#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmc/dataset.hpp"

namespace xmc {

// Per test point: labels sorted by score descending (ties toward the lower id).
struct RankedPrediction {
    std::vector<uint32_t> labels;
    std::vector<double> scores;
};

using Predictions = std::vector<RankedPrediction>;

// macro-averaged over test points
double precision_at_k(const Predictions& pred, const Dataset& truth, uint32_t k);
// skips zero-label points
double recall_at_k(const Predictions& pred, const Dataset& truth, uint32_t k);
double ndcg_at_k(const Predictions& pred, const Dataset& truth, uint32_t k);

// As printed: sum of y/p over the top K, macro-averaged. `normalized` divides
// per point by the best attainable value (community convention).
double psp_at_k(const Predictions& pred, const Dataset& truth,
                const std::vector<double>& propensities, uint32_t k, bool normalized = false);

// per label: sum of scores across models (absent = 0), re-ranked
Predictions merge_ensemble(const std::vector<Predictions>& runs);

void sort_ranked(RankedPrediction& rp);

// One line per point, space-separated "label:score" pairs.
Predictions load_predictions(const std::string& path);
void save_predictions(const Predictions& preds, const std::string& path);

}  // namespace xmc
