#include "xmc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xmc {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> final_scores(const Matrix& label_classifiers,
                                 const std::vector<double>& phi_x,
                                 const ShortlistResult& shortlist) {
    std::vector<double> p;
    p.reserve(shortlist.entries.size());
    for (const ShortlistEntry& e : shortlist.entries) {
        double u = dot(label_classifiers.row(e.label), phi_x.data(), phi_x.size());
        p.push_back(sigmoid(u) * e.score);
    }
    return p;
}

double classification_loss(const std::vector<double>& scores,
                           const std::vector<uint8_t>& truth) {
    if (scores.size() != truth.size())
        throw std::invalid_argument("classification_loss: size mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        double p = std::clamp(scores[i], kLogEps, 1.0 - kLogEps);
        loss -= truth[i] ? std::log(p) : std::log(1.0 - p);
    }
    return loss;
}

double shortlist_loss(const std::vector<double>& positive_scores) {
    double loss = 0.0;
    for (double y : positive_scores) {
        if (y <= 0.0)
            throw std::runtime_error("shortlist_loss: positive label missing from path set");
        loss -= std::log(std::max(y, kLogEps));
    }
    return loss;
}

double total_loss(double classification, double shortlisting, double lambda) {
    return classification + lambda * shortlisting;
}

}  // namespace xmc
