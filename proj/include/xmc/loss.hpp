#pragma once

#include <vector>

#include "xmc/index.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

inline constexpr double kLogEps = 1e-12;

struct LossBreakdown {
    double classification = 0.0;  // L_c
    double shortlisting = 0.0;    // L_s
    double lambda = 0.0;
    double total() const { return classification + lambda * shortlisting; }
};

// p_l = sigmoid(w_l . phi) * yhat_l for each shortlisted label
std::vector<double> final_scores(const Matrix& label_classifiers,
                                 const std::vector<double>& phi_x,
                                 const ShortlistResult& shortlist);

// Binary cross entropy over the shortlist; `truth` is indexed parallel to
// `shortlist.entries`.
double classification_loss(const std::vector<double>& scores,
                           const std::vector<uint8_t>& truth);

// -sum log yhat over positives. `positive_scores` are the yhat of each
// positive label; every positive must be reached (training-mode guarantee).
double shortlist_loss(const std::vector<double>& positive_scores);

double total_loss(double classification, double shortlisting, double lambda);

double sigmoid(double x);

}  // namespace xmc
