#include "xmc/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "xmc/loss.hpp"
#include "xmc/threads.hpp"
#include "xmc/train.hpp"

namespace xmc {

SparseVector ranker_features(const Dataset& ds, const EncoderParams& encoder, uint32_t point) {
    std::vector<double> phi = encode(encoder, ds.features[point], point);
    StaticRep rep = static_rep(ds.features[point], phi);
    SparseVector psi = rep.bow;
    for (uint32_t j = 0; j < rep.dense.size(); ++j)
        if (rep.dense[j] != 0.0) psi.push(ds.num_features + j, rep.dense[j]);
    return psi;
}

namespace {

// in-place Cholesky solve of (symmetric positive definite) H x = g
std::vector<double> cholesky_solve(std::vector<double> h, std::vector<double> g, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        double d = h[j * n + j];
        for (size_t k = 0; k < j; ++k) d -= h[j * n + k] * h[j * n + k];
        if (d <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        d = std::sqrt(d);
        h[j * n + j] = d;
        for (size_t i = j + 1; i < n; ++i) {
            double s = h[i * n + j];
            for (size_t k = 0; k < j; ++k) s -= h[i * n + k] * h[j * n + k];
            h[i * n + j] = s / d;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double s = g[i];
        for (size_t k = 0; k < i; ++k) s -= h[i * n + k] * g[k];
        g[i] = s / h[i * n + i];
    }
    for (size_t ii = n; ii > 0; --ii) {
        size_t i = ii - 1;
        double s = g[i];
        for (size_t k = i + 1; k < n; ++k) s -= h[k * n + i] * g[k];
        g[i] = s / h[i * n + i];
    }
    return g;
}

double logistic_objective(const std::vector<std::vector<double>>& x,
                          const std::vector<uint8_t>& y, const std::vector<double>& w,
                          double reg) {
    double obj = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double u = dot(x[i].data(), w.data(), w.size());
        // log(1 + exp(-t*u)) with t in {-1, +1}, computed stably
        double tu = y[i] ? u : -u;
        obj += tu >= 0.0 ? std::log1p(std::exp(-tu)) : -tu + std::log1p(std::exp(tu));
    }
    obj += 0.5 * reg * dot(w.data(), w.data(), w.size());
    return obj;
}

// Newton with backtracking on the compacted feature subspace.
std::vector<double> solve_logistic(const std::vector<std::vector<double>>& x,
                                   const std::vector<uint8_t>& y, double reg, int max_iters) {
    size_t n = x.empty() ? 0 : x[0].size();
    std::vector<double> w(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<double> grad(n, 0.0);
        std::vector<double> hess(n * n, 0.0);
        for (size_t i = 0; i < x.size(); ++i) {
            double u = dot(x[i].data(), w.data(), n);
            double s = sigmoid(u);
            axpy(s - (y[i] ? 1.0 : 0.0), x[i].data(), grad.data(), n);
            double d = std::max(s * (1.0 - s), 1e-10);
            for (size_t a = 0; a < n; ++a)
                for (size_t b = 0; b <= a; ++b) hess[a * n + b] += d * x[i][a] * x[i][b];
        }
        axpy(reg, w.data(), grad.data(), n);
        if (l2_norm(grad.data(), n) <= 1e-6) break;
        for (size_t a = 0; a < n; ++a) {
            hess[a * n + a] += reg;
            for (size_t b = a + 1; b < n; ++b) hess[a * n + b] = hess[b * n + a];
        }
        std::vector<double> step = cholesky_solve(std::move(hess), grad, n);
        double f0 = logistic_objective(x, y, w, reg);
        double t = 1.0;
        std::vector<double> cand(n);
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            for (size_t a = 0; a < n; ++a) cand[a] = w[a] - t * step[a];
            if (logistic_objective(x, y, cand, reg) <= f0) break;
        }
        w = cand;
    }
    return w;
}

}  // namespace

RankerWeights train_ranker(const Dataset& ds, const ModelParams& model,
                           const TrainConfig& config, double reg, unsigned threads,
                           int max_iters) {
    Predictions top = predict(model, config, ds, 100, threads);

    std::vector<SparseVector> psi(ds.num_points);
    parallel_for(ds.num_points, threads,
                 [&](size_t i) { psi[i] = ranker_features(ds, model.encoder, (uint32_t)i); });

    std::vector<std::vector<uint32_t>> points_of(ds.num_labels);
    for (uint32_t i = 0; i < ds.num_points; ++i)
        for (uint32_t l : top[i].labels) points_of[l].push_back(i);

    RankerWeights rw;
    rw.num_labels = ds.num_labels;
    rw.dim = ds.num_features + model.encoder.dim;
    rw.weights.resize(ds.num_labels);

    std::vector<uint8_t> untrained(ds.num_labels, 0);
    parallel_for(ds.num_labels, threads, [&](size_t li) {
        uint32_t l = static_cast<uint32_t>(li);
        const auto& pts = points_of[l];
        if (pts.empty()) {
            untrained[l] = 1;
            return;
        }
        // compact to the union of active dimensions
        std::vector<uint32_t> dims;
        for (uint32_t p : pts)
            dims.insert(dims.end(), psi[p].indices.begin(), psi[p].indices.end());
        std::sort(dims.begin(), dims.end());
        dims.erase(std::unique(dims.begin(), dims.end()), dims.end());

        std::vector<std::vector<double>> x(pts.size(), std::vector<double>(dims.size(), 0.0));
        std::vector<uint8_t> y(pts.size(), 0);
        for (size_t i = 0; i < pts.size(); ++i) {
            const SparseVector& v = psi[pts[i]];
            for (size_t k = 0; k < v.nnz(); ++k) {
                size_t d = std::lower_bound(dims.begin(), dims.end(), v.indices[k]) -
                           dims.begin();
                x[i][d] = v.values[k];
            }
            auto labels = ds.labels_of(pts[i]);
            y[i] = std::binary_search(labels.begin(), labels.end(), l) ? 1 : 0;
        }
        std::vector<double> w = solve_logistic(x, y, reg, max_iters);
        for (size_t d = 0; d < dims.size(); ++d)
            if (w[d] != 0.0) rw.weights[l].push(dims[d], w[d]);
    });
    for (uint32_t l = 0; l < ds.num_labels; ++l)
        if (untrained[l]) rw.untrained_labels.push_back(l);
    return rw;
}

double ranker_score(const RankerWeights& weights, uint32_t label, const SparseVector& psi) {
    const SparseVector& w = weights.weights[label];
    double u = 0.0;
    size_t i = 0, j = 0;
    while (i < w.nnz() && j < psi.nnz()) {
        if (w.indices[i] < psi.indices[j]) ++i;
        else if (w.indices[i] > psi.indices[j]) ++j;
        else u += w.values[i++] * psi.values[j++];
    }
    return sigmoid(u);
}

RankerWeights load_ranker(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ranker file: " + path);
    RankerWeights rw;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ranker file: missing header");
    {
        std::istringstream hs(line);
        if (!(hs >> rw.num_labels >> rw.dim))
            throw std::runtime_error("ranker file: bad header");
    }
    rw.weights.resize(rw.num_labels);
    std::vector<uint8_t> seen(rw.num_labels, 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        uint32_t l = 0;
        ls >> l;
        if (l >= rw.num_labels) throw std::runtime_error("ranker file: label out of range");
        seen[l] = 1;
        std::string tok;
        while (ls >> tok) {
            size_t colon = tok.find(':');
            rw.weights[l].push(static_cast<uint32_t>(std::stoul(tok.substr(0, colon))),
                               std::stod(tok.substr(colon + 1)));
        }
    }
    for (uint32_t l = 0; l < rw.num_labels; ++l)
        if (!seen[l]) rw.untrained_labels.push_back(l);
    return rw;
}

void save_ranker(const RankerWeights& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << w.num_labels << " " << w.dim << "\n";
    out.precision(17);
    std::vector<uint8_t> untrained(w.num_labels, 0);
    for (uint32_t l : w.untrained_labels) untrained[l] = 1;
    for (uint32_t l = 0; l < w.num_labels; ++l) {
        if (untrained[l]) continue;
        out << l;
        for (size_t k = 0; k < w.weights[l].nnz(); ++k)
            out << " " << w.weights[l].indices[k] << ":" << w.weights[l].values[k];
        out << "\n";
    }
}

double CalibrationTree::predict(double p, double q, double f) const {
    double feat[4] = {p, q, p * q, f};
    int i = 0;
    while (nodes[i].feature >= 0)
        i = feat[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

namespace {

int grow_tree(CalibrationTree& tree, const std::vector<CalibrationSample>& samples,
              std::vector<uint32_t>& ids, int depth) {
    size_t n = ids.size();
    size_t pos = 0;
    for (uint32_t i : ids) pos += samples[i].relevant;

    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = n ? static_cast<double>(pos) / n : 0.0;
    if (depth >= tree.max_depth || n < 2 * static_cast<size_t>(tree.min_leaf) || pos == 0 ||
        pos == n)
        return node_id;

    auto feature_of = [&](uint32_t i, int f) {
        const CalibrationSample& s = samples[i];
        switch (f) {
            case 0: return s.retrieval_score;
            case 1: return s.ranker_score;
            case 2: return s.retrieval_score * s.ranker_score;
            default: return s.label_freq;
        }
    };

    int best_f = -1;
    double best_thr = 0.0, best_impurity = 1e300;
    for (int f = 0; f < 4; ++f) {
        std::vector<std::pair<double, uint8_t>> vals(n);
        for (size_t i = 0; i < n; ++i) vals[i] = {feature_of(ids[i], f), samples[ids[i]].relevant};
        std::sort(vals.begin(), vals.end());
        size_t left_pos = 0;
        for (size_t i = 0; i + 1 < n; ++i) {
            left_pos += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<size_t>(tree.min_leaf) ||
                nr < static_cast<size_t>(tree.min_leaf))
                continue;
            double pl = static_cast<double>(left_pos) / nl;
            double pr = static_cast<double>(pos - left_pos) / nr;
            double gini = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
            if (gini < best_impurity) {
                best_impurity = gini;
                best_f = f;
                best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
            }
        }
    }
    if (best_f < 0) return node_id;

    std::vector<uint32_t> left, right;
    for (uint32_t i : ids)
        (feature_of(i, best_f) <= best_thr ? left : right).push_back(i);
    if (left.size() < static_cast<size_t>(tree.min_leaf) ||
        right.size() < static_cast<size_t>(tree.min_leaf))
        return node_id;

    tree.nodes[node_id].feature = best_f;
    tree.nodes[node_id].threshold = best_thr;
    ids.clear();
    ids.shrink_to_fit();
    int l = grow_tree(tree, samples, left, depth + 1);
    int r = grow_tree(tree, samples, right, depth + 1);
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    return node_id;
}

}  // namespace

CalibrationTree fit_calibration(const std::vector<CalibrationSample>& samples, int max_depth,
                                int min_leaf) {
    if (samples.empty()) throw std::invalid_argument("fit_calibration: no samples");
    CalibrationTree tree;
    tree.max_depth = max_depth;
    tree.min_leaf = min_leaf;
    std::vector<uint32_t> ids(samples.size());
    std::iota(ids.begin(), ids.end(), 0);
    grow_tree(tree, samples, ids, 0);
    return tree;
}

double calibrated_score(const CalibrationTree& tree, double p, double q, double f) {
    return tree.predict(p, q, f) + p * q;
}

CalibrationTree load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calibration file: " + path);
    nlohmann::json j;
    in >> j;
    CalibrationTree tree;
    tree.max_depth = j.at("max_depth");
    tree.min_leaf = j.at("min_leaf");
    for (const auto& nj : j.at("nodes")) {
        CalibrationTree::Node n;
        if (nj.contains("leaf")) {
            n.value = nj.at("leaf");
        } else {
            n.feature = nj.at("feature");
            n.threshold = nj.at("threshold");
            n.left = nj.at("left");
            n.right = nj.at("right");
        }
        tree.nodes.push_back(n);
    }
    return tree;
}

void save_calibration(const CalibrationTree& tree, const std::string& path) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        if (n.feature < 0) nodes.push_back({{"leaf", n.value}});
        else
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
    }
    nlohmann::json j = {{"max_depth", tree.max_depth},
                        {"min_leaf", tree.min_leaf},
                        {"nodes", nodes}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

Predictions rerank(const Predictions& base, const Dataset& ds, const EncoderParams& encoder,
                   const RankerWeights& weights, const CalibrationTree* tree,
                   const std::vector<uint32_t>& label_frequencies, unsigned threads) {
    Predictions out(base.size());
    parallel_for(base.size(), threads, [&](size_t i) {
        SparseVector psi = ranker_features(ds, encoder, static_cast<uint32_t>(i));
        RankedPrediction rp;
        for (size_t j = 0; j < base[i].labels.size(); ++j) {
            uint32_t l = base[i].labels[j];
            double p = base[i].scores[j];
            double q = ranker_score(weights, l, psi);
            double f = static_cast<double>(label_frequencies[l]);
            rp.labels.push_back(l);
            rp.scores.push_back(tree ? calibrated_score(*tree, p, q, f) : p * q);
        }
        sort_ranked(rp);
        out[i] = std::move(rp);
    });
    return out;
}

}  // namespace xmc
