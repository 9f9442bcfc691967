#include "xmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace xmc {

namespace {

std::vector<uint8_t> truth_mask(const Dataset& truth, uint32_t point) {
    std::vector<uint8_t> mask(truth.num_labels, 0);
    for (size_t p = truth.label_indptr[point]; p < truth.label_indptr[point + 1]; ++p)
        mask[truth.label_ids[p]] = 1;
    return mask;
}

void check_sizes(const Predictions& pred, const Dataset& truth) {
    if (pred.size() != truth.num_points)
        throw std::invalid_argument("metrics: prediction/truth point count mismatch");
}

}  // namespace

double precision_at_k(const Predictions& pred, const Dataset& truth, uint32_t k) {
    check_sizes(pred, truth);
    double total = 0.0;
    for (uint32_t i = 0; i < truth.num_points; ++i) {
        auto mask = truth_mask(truth, i);
        size_t hits = 0;
        for (size_t j = 0; j < std::min<size_t>(k, pred[i].labels.size()); ++j)
            hits += mask[pred[i].labels[j]];
        total += static_cast<double>(hits) / k;
    }
    return total / truth.num_points;
}

double recall_at_k(const Predictions& pred, const Dataset& truth, uint32_t k) {
    check_sizes(pred, truth);
    double total = 0.0;
    size_t counted = 0;
    for (uint32_t i = 0; i < truth.num_points; ++i) {
        size_t npos = truth.num_point_labels(i);
        if (npos == 0) continue;
        auto mask = truth_mask(truth, i);
        size_t hits = 0;
        for (size_t j = 0; j < std::min<size_t>(k, pred[i].labels.size()); ++j)
            hits += mask[pred[i].labels[j]];
        total += static_cast<double>(hits) / npos;
        ++counted;
    }
    return counted ? total / counted : 0.0;
}

double ndcg_at_k(const Predictions& pred, const Dataset& truth, uint32_t k) {
    check_sizes(pred, truth);
    double total = 0.0;
    size_t counted = 0;
    for (uint32_t i = 0; i < truth.num_points; ++i) {
        size_t npos = truth.num_point_labels(i);
        if (npos == 0) continue;
        auto mask = truth_mask(truth, i);
        double dcg = 0.0;
        for (size_t j = 0; j < std::min<size_t>(k, pred[i].labels.size()); ++j)
            if (mask[pred[i].labels[j]]) dcg += 1.0 / std::log2(2.0 + j);
        double idcg = 0.0;
        for (size_t j = 0; j < std::min<size_t>(k, npos); ++j) idcg += 1.0 / std::log2(2.0 + j);
        total += dcg / idcg;
        ++counted;
    }
    return counted ? total / counted : 0.0;
}

double psp_at_k(const Predictions& pred, const Dataset& truth,
                const std::vector<double>& propensities, uint32_t k, bool normalized) {
    check_sizes(pred, truth);
    for (double p : propensities)
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("psp_at_k: propensities must be in (0,1]");
    double total = 0.0;
    for (uint32_t i = 0; i < truth.num_points; ++i) {
        auto mask = truth_mask(truth, i);
        double score = 0.0;
        for (size_t j = 0; j < std::min<size_t>(k, pred[i].labels.size()); ++j) {
            uint32_t l = pred[i].labels[j];
            if (mask[l]) score += 1.0 / propensities[l];
        }
        if (normalized) {
            // best attainable: rank the point's own labels by 1/p descending
            std::vector<double> inv;
            for (size_t p = truth.label_indptr[i]; p < truth.label_indptr[i + 1]; ++p)
                inv.push_back(1.0 / propensities[truth.label_ids[p]]);
            std::sort(inv.rbegin(), inv.rend());
            double best = 0.0;
            for (size_t j = 0; j < std::min<size_t>(k, inv.size()); ++j) best += inv[j];
            score = best > 0.0 ? score / best : 0.0;
        }
        total += score;
    }
    return total / truth.num_points;
}

void sort_ranked(RankedPrediction& rp) {
    std::vector<size_t> order(rp.labels.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return rp.scores[a] != rp.scores[b] ? rp.scores[a] > rp.scores[b]
                                            : rp.labels[a] < rp.labels[b];
    });
    RankedPrediction out;
    out.labels.reserve(order.size());
    out.scores.reserve(order.size());
    for (size_t i : order) {
        out.labels.push_back(rp.labels[i]);
        out.scores.push_back(rp.scores[i]);
    }
    rp = std::move(out);
}

Predictions merge_ensemble(const std::vector<Predictions>& runs) {
    if (runs.empty()) return {};
    size_t n = runs[0].size();
    for (const auto& r : runs)
        if (r.size() != n) throw std::invalid_argument("merge_ensemble: size mismatch");
    Predictions out(n);
    for (size_t i = 0; i < n; ++i) {
        std::map<uint32_t, double> sum;
        for (const auto& r : runs)
            for (size_t j = 0; j < r[i].labels.size(); ++j) sum[r[i].labels[j]] += r[i].scores[j];
        for (const auto& [l, s] : sum) {
            out[i].labels.push_back(l);
            out[i].scores.push_back(s);
        }
        sort_ranked(out[i]);
    }
    return out;
}

Predictions load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open predictions file: " + path);
    Predictions preds;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        RankedPrediction rp;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            size_t colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("predictions file: bad token \"" + tok + "\"");
            rp.labels.push_back(static_cast<uint32_t>(std::stoul(tok.substr(0, colon))));
            rp.scores.push_back(std::stod(tok.substr(colon + 1)));
        }
        preds.push_back(std::move(rp));
    }
    return preds;
}

void save_predictions(const Predictions& preds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.precision(17);
    for (const auto& rp : preds) {
        for (size_t j = 0; j < rp.labels.size(); ++j)
            out << (j ? " " : "") << rp.labels[j] << ":" << rp.scores[j];
        out << "\n";
    }
    if (!out) throw std::runtime_error("predictions file: write failed");
}

}  // namespace xmc
