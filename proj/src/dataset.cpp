#include "xmc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "xmc/rng.hpp"

namespace xmc {

std::vector<uint32_t> Dataset::label_frequencies() const {
    std::vector<uint32_t> freq(num_labels, 0);
    for (uint32_t l : label_ids) freq[l]++;
    return freq;
}

std::vector<uint32_t> Dataset::empty_label_points() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < num_points; ++i)
        if (label_indptr[i + 1] == label_indptr[i]) out.push_back(i);
    return out;
}

void Dataset::validate() const {
    if (features.size() != num_points || label_indptr.size() != num_points + 1)
        throw std::invalid_argument("Dataset: inconsistent sizes");
    for (const auto& f : features) {
        f.validate();
        if (!f.indices.empty() && f.indices.back() >= num_features)
            throw std::out_of_range("Dataset: feature index out of range");
    }
    for (uint32_t l : label_ids)
        if (l >= num_labels) throw std::out_of_range("Dataset: label index out of range");
}

namespace {

[[noreturn]] void parse_error(size_t line_no, const std::string& what) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": " + what);
}

void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

Dataset load_xmc_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) parse_error(1, "missing header");
    strip_cr(line);

    Dataset ds;
    {
        std::istringstream hs(line);
        long long n = -1, d = -1, l = -1;
        if (!(hs >> n >> d >> l) || n < 0 || d < 0 || l < 0)
            parse_error(1, "expected header \"N D L\"");
        std::string extra;
        if (hs >> extra) parse_error(1, "trailing tokens in header");
        ds.num_points = static_cast<uint32_t>(n);
        ds.num_features = static_cast<uint32_t>(d);
        ds.num_labels = static_cast<uint32_t>(l);
    }

    ds.features.reserve(ds.num_points);
    ds.label_indptr.push_back(0);

    for (uint32_t i = 0; i < ds.num_points; ++i) {
        size_t line_no = i + 2;
        if (!std::getline(in, line)) parse_error(line_no, "unexpected end of file");
        strip_cr(line);

        // labels are everything before the first space (may be empty)
        size_t sp = line.find(' ');
        std::string label_part = line.substr(0, sp);

        std::vector<uint32_t> labels;
        if (!label_part.empty()) {
            std::istringstream ls(label_part);
            std::string tok;
            while (std::getline(ls, tok, ',')) {
                if (tok.empty()) parse_error(line_no, "empty label token");
                size_t pos = 0;
                unsigned long v = std::stoul(tok, &pos);
                if (pos != tok.size()) parse_error(line_no, "bad label \"" + tok + "\"");
                if (v >= ds.num_labels)
                    throw std::out_of_range("line " + std::to_string(line_no) +
                                            ": label index " + tok + " >= L");
                labels.push_back(static_cast<uint32_t>(v));
            }
        }
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        ds.label_ids.insert(ds.label_ids.end(), labels.begin(), labels.end());
        ds.label_indptr.push_back(ds.label_ids.size());

        SparseVector feat;
        if (sp != std::string::npos) {
            std::istringstream fs(line.substr(sp + 1));
            std::string tok;
            std::vector<std::pair<uint32_t, double>> entries;
            while (fs >> tok) {
                size_t colon = tok.find(':');
                if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
                    parse_error(line_no, "bad feature token \"" + tok + "\"");
                size_t pos = 0;
                unsigned long idx = std::stoul(tok.substr(0, colon), &pos);
                if (pos != colon) parse_error(line_no, "bad feature index in \"" + tok + "\"");
                double val = std::stod(tok.substr(colon + 1), &pos);
                if (pos != tok.size() - colon - 1)
                    parse_error(line_no, "bad feature value in \"" + tok + "\"");
                if (idx >= ds.num_features)
                    throw std::out_of_range("line " + std::to_string(line_no) +
                                            ": feature index >= D");
                entries.emplace_back(static_cast<uint32_t>(idx), val);
            }
            std::sort(entries.begin(), entries.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (size_t k = 0; k < entries.size(); ++k) {
                if (k > 0 && entries[k].first == entries[k - 1].first)
                    parse_error(line_no, "duplicate feature index " +
                                             std::to_string(entries[k].first));
                feat.push(entries[k].first, entries[k].second);
            }
        }
        ds.features.push_back(std::move(feat));
    }
    return ds;
}

void write_xmc_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << ds.num_points << " " << ds.num_features << " " << ds.num_labels << "\n";
    out.precision(17);
    for (uint32_t i = 0; i < ds.num_points; ++i) {
        auto labels = ds.labels_of(i);
        for (size_t k = 0; k < labels.size(); ++k) out << (k ? "," : "") << labels[k];
        const SparseVector& f = ds.features[i];
        for (size_t k = 0; k < f.nnz(); ++k)
            out << " " << f.indices[k] << ":" << f.values[k];
        out << "\n";
    }
}

PropensityModel compute_propensities(const Dataset& ds, double a, double b) {
    if (ds.num_points == 0) throw std::invalid_argument("compute_propensities: empty dataset");
    PropensityModel pm;
    pm.param_a = a;
    pm.param_b = b;
    double c = (std::log(static_cast<double>(ds.num_points)) - 1.0) * std::pow(b + 1.0, a);
    auto freq = ds.label_frequencies();
    pm.propensities.resize(ds.num_labels);
    for (uint32_t l = 0; l < ds.num_labels; ++l) {
        double nl = static_cast<double>(freq[l]);
        pm.propensities[l] = 1.0 / (1.0 + c * std::exp(-a * std::log(nl + b)));
    }
    return pm;
}

Dataset subset(const Dataset& ds, const std::vector<uint32_t>& points) {
    Dataset out;
    out.num_points = static_cast<uint32_t>(points.size());
    out.num_features = ds.num_features;
    out.num_labels = ds.num_labels;
    out.label_indptr.push_back(0);
    for (uint32_t p : points) {
        out.features.push_back(ds.features[p]);
        auto labels = ds.labels_of(p);
        out.label_ids.insert(out.label_ids.end(), labels.begin(), labels.end());
        out.label_indptr.push_back(out.label_ids.size());
    }
    return out;
}

std::pair<Dataset, Dataset> split_validation(const Dataset& ds, uint32_t n_val, uint64_t seed) {
    if (n_val >= ds.num_points)
        throw std::invalid_argument("split_validation: n_val must be < N");
    std::vector<uint32_t> order(ds.num_points);
    for (uint32_t i = 0; i < ds.num_points; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<uint32_t> val(order.begin(), order.begin() + n_val);
    std::vector<uint32_t> train(order.begin() + n_val, order.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    return {subset(ds, train), subset(ds, val)};
}

}  // namespace xmc
