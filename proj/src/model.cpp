#include "xmc/model.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace xmc {

namespace {

constexpr char kMagic[8] = {'X', 'M', 'C', 'C', 'K', 'P', 'T', '1'};

void write_blob(std::ofstream& out, const std::vector<double>& v) {
    uint64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(v.data()), 8 * n);
}

std::vector<double> read_blob(std::ifstream& in) {
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), 8 * n);
    if (!in) throw std::runtime_error("checkpoint: truncated blob");
    return v;
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"alpha", c.alpha},
            {"beta", c.beta},
            {"kappa", c.kappa},
            {"lambda", c.lambda},
            {"shortlist_k", c.shortlist_k},
            {"beam", c.beam},
            {"num_clusters", c.num_clusters},
            {"stage1_epochs", c.stage1_epochs},
            {"stage2_epochs", c.stage2_epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"lr_classifiers", c.lr_classifiers},
            {"lr_encoder", c.lr_encoder},
            {"weight_decay", c.weight_decay},
            {"label_grad_accum", c.label_grad_accum}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.alpha = j.at("alpha");
    c.beta = j.at("beta");
    c.kappa = j.at("kappa");
    c.lambda = j.at("lambda");
    c.shortlist_k = j.at("shortlist_k");
    c.beam = j.at("beam");
    c.num_clusters = j.at("num_clusters");
    c.stage1_epochs = j.at("stage1_epochs");
    c.stage2_epochs = j.at("stage2_epochs");
    c.batch_size = j.at("batch_size");
    c.seed = j.at("seed");
    c.lr_classifiers = j.at("lr_classifiers");
    c.lr_encoder = j.at("lr_encoder");
    c.weight_decay = j.at("weight_decay");
    c.label_grad_accum = j.at("label_grad_accum");
    return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(kMagic, 8);

    nlohmann::json header = {
        {"config", config_to_json(ck.config)},
        {"stage", static_cast<uint32_t>(ck.stage)},
        {"diverged", ck.diverged},
        {"encoder_mode", ck.model.encoder.mode == EncoderMode::Linear ? "linear" : "precomputed"},
        {"dim", ck.model.encoder.dim},
        {"proj_rows", ck.model.encoder.projection.rows()},
        {"precomputed_rows", ck.model.encoder.precomputed.rows()},
        {"num_clusters", ck.model.cluster_classifiers.rows()},
        {"num_labels", ck.model.label_classifiers.rows()},
    };
    std::string hs = header.dump();
    uint64_t hn = hs.size();
    out.write(reinterpret_cast<const char*>(&hn), 8);
    out.write(hs.data(), hn);

    write_blob(out, ck.model.encoder.projection.data());
    write_blob(out, ck.model.encoder.precomputed.data());
    write_blob(out, ck.model.cluster_classifiers.data());
    write_blob(out, ck.model.label_classifiers.data());

    // partition
    uint64_t pl = ck.partition.assignment.size();
    out.write(reinterpret_cast<const char*>(&pl), 8);
    out.write(reinterpret_cast<const char*>(&ck.partition.num_clusters), 4);
    out.write(reinterpret_cast<const char*>(ck.partition.assignment.data()), 4 * pl);

    // adjacency
    const AdjacencyMatrix& a = ck.model.adjacency;
    out.write(reinterpret_cast<const char*>(&a.num_clusters), 4);
    out.write(reinterpret_cast<const char*>(&a.num_labels), 4);
    out.write(reinterpret_cast<const char*>(&a.kappa), 4);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        uint32_t n = static_cast<uint32_t>(a.row_labels[c].size());
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(a.row_labels[c].data()), 4ull * n);
        out.write(reinterpret_cast<const char*>(a.row_weights[c].data()), 8ull * n);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("not a checkpoint file: " + path);

    uint64_t hn = 0;
    in.read(reinterpret_cast<char*>(&hn), 8);
    std::string hs(hn, '\0');
    in.read(hs.data(), hn);
    nlohmann::json header = nlohmann::json::parse(hs);

    Checkpoint ck;
    ck.config = config_from_json(header.at("config"));
    ck.stage = static_cast<Stage>(header.at("stage").get<uint32_t>());
    ck.diverged = header.at("diverged");
    ck.model.encoder.mode = header.at("encoder_mode") == "linear" ? EncoderMode::Linear
                                                                  : EncoderMode::Precomputed;
    ck.model.encoder.dim = header.at("dim");

    uint32_t dim = ck.model.encoder.dim;
    auto to_matrix = [&](std::vector<double> blob, size_t rows) {
        Matrix m(rows, rows ? blob.size() / rows : 0);
        m.data() = std::move(blob);
        return m;
    };
    ck.model.encoder.projection = to_matrix(read_blob(in), header.at("proj_rows"));
    ck.model.encoder.precomputed = to_matrix(read_blob(in), header.at("precomputed_rows"));
    ck.model.cluster_classifiers = to_matrix(read_blob(in), header.at("num_clusters"));
    ck.model.label_classifiers = to_matrix(read_blob(in), header.at("num_labels"));
    (void)dim;

    uint64_t pl = 0;
    in.read(reinterpret_cast<char*>(&pl), 8);
    in.read(reinterpret_cast<char*>(&ck.partition.num_clusters), 4);
    ck.partition.assignment.resize(pl);
    in.read(reinterpret_cast<char*>(ck.partition.assignment.data()), 4 * pl);

    AdjacencyMatrix& a = ck.model.adjacency;
    in.read(reinterpret_cast<char*>(&a.num_clusters), 4);
    in.read(reinterpret_cast<char*>(&a.num_labels), 4);
    in.read(reinterpret_cast<char*>(&a.kappa), 4);
    a.row_labels.resize(a.num_clusters);
    a.row_weights.resize(a.num_clusters);
    for (uint32_t c = 0; c < a.num_clusters; ++c) {
        uint32_t n = 0;
        in.read(reinterpret_cast<char*>(&n), 4);
        a.row_labels[c].resize(n);
        a.row_weights[c].resize(n);
        in.read(reinterpret_cast<char*>(a.row_labels[c].data()), 4ull * n);
        in.read(reinterpret_cast<char*>(a.row_weights[c].data()), 8ull * n);
    }
    if (!in) throw std::runtime_error("checkpoint: truncated file: " + path);
    return ck;
}

}  // namespace xmc
