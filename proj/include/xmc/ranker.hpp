#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xmc/dataset.hpp"
#include "xmc/encoder.hpp"
#include "xmc/metrics.hpp"
#include "xmc/model.hpp"

namespace xmc {

// Per-label sparse linear re-scorers over the concatenated static
// representation (dim = num_features + encoder dim).
struct RankerWeights {
    uint32_t num_labels = 0;
    uint32_t dim = 0;
    std::vector<SparseVector> weights;      // per label
    std::vector<uint32_t> untrained_labels; // labels never shortlisted; zero weights
};

// Static representation as one sparse vector over num_features + dim.
SparseVector ranker_features(const Dataset& ds, const EncoderParams& encoder, uint32_t point);

// Per-label L2-regularized logistic regression on the points whose top-100
// predictions contain the label. Newton iterations to gradient norm <= 1e-6
// or the iteration cap.
RankerWeights train_ranker(const Dataset& ds, const ModelParams& model,
                           const TrainConfig& config, double reg = 1.0,
                           unsigned threads = 1, int max_iters = 100);

double ranker_score(const RankerWeights& weights, uint32_t label, const SparseVector& psi);

RankerWeights load_ranker(const std::string& path);
void save_ranker(const RankerWeights& w, const std::string& path);

// Binary decision tree over the 4 features (p, q, p*q, f): CART with Gini
// impurity; leaf value is the positive fraction.
struct CalibrationTree {
    struct Node {
        int feature = -1;      // -1: leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;  // node 0 is the root
    int max_depth = 8;
    int min_leaf = 50;

    double predict(double p, double q, double f) const;
};

struct CalibrationSample {
    double retrieval_score = 0.0;   // p
    double ranker_score = 0.0;  // q
    double label_freq = 0.0;    // f
    uint8_t relevant = 0;       // y
};

CalibrationTree fit_calibration(const std::vector<CalibrationSample>& samples,
                                int max_depth = 8, int min_leaf = 50);

// T(p, q, p*q, f) + p*q
double calibrated_score(const CalibrationTree& tree, double p, double q, double f);

CalibrationTree load_calibration(const std::string& path);
void save_calibration(const CalibrationTree& tree, const std::string& path);

// Re-score each point's existing top-100 set; calibration optional.
Predictions rerank(const Predictions& base, const Dataset& ds, const EncoderParams& encoder,
                   const RankerWeights& weights, const CalibrationTree* tree,
                   const std::vector<uint32_t>& label_frequencies, unsigned threads = 1);

}  // namespace xmc
