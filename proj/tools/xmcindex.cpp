// Pipeline driver: ingest -> cluster -> train-stage1 -> init-adjacency ->
// train-stage2 -> predict -> train-ranker -> calibrate -> evaluate, plus
// prune and ensemble. Every subcommand writes a manifest next to its output
// so runs can be reproduced and verified byte for byte.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmc/analysis.hpp"
#include "xmc/clustering.hpp"
#include "xmc/dataset.hpp"
#include "xmc/index.hpp"
#include "xmc/metrics.hpp"
#include "xmc/model.hpp"
#include "xmc/ranker.hpp"
#include "xmc/rng.hpp"
#include "xmc/threads.hpp"
#include "xmc/train.hpp"

namespace {

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input for hashing: " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

nlohmann::json config_json(const xmc::TrainConfig& c) {
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

void write_manifest(const std::string& command, const std::string& output,
                    const std::vector<std::string>& inputs, const nlohmann::json& config,
                    uint64_t seed) {
    nlohmann::json m;
    m["command"] = command;
    m["seed"] = seed;
    m["config"] = config;
    nlohmann::json in = nlohmann::json::object();
    for (const std::string& p : inputs) {
        std::ostringstream hex;
        hex << std::hex << fnv1a_file(p);
        in[p] = hex.str();
    }
    m["inputs"] = in;
    std::ofstream out(output + ".manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest for " + output);
    out << m.dump(2) << "\n";
}

// shared hyperparameter flags; the config file fills anything not on the
// command line, flags win
void add_train_flags(CLI::App* cmd, xmc::TrainConfig& c) {
    cmd->add_option("--alpha", c.alpha, "cluster score gain");
    cmd->add_option("--beta", c.beta, "edge score gain");
    cmd->add_option("--kappa", c.kappa, "row sparsity cap (0 = 10*L/C)");
    cmd->add_option("--lambda", c.lambda, "shortlist loss weight");
    cmd->add_option("--shortlist-k", c.shortlist_k, "shortlist size K");
    cmd->add_option("--beam", c.beam, "beam size b");
    cmd->add_option("--clusters", c.num_clusters, "number of clusters C (power of two)");
    cmd->add_option("--stage1-epochs", c.stage1_epochs);
    cmd->add_option("--stage2-epochs", c.stage2_epochs);
    cmd->add_option("--batch-size", c.batch_size);
    cmd->add_option("--seed", c.seed);
    cmd->add_option("--lr", c.lr_classifiers, "classifier/adjacency learning rate");
    cmd->add_option("--lr-encoder", c.lr_encoder);
    cmd->add_option("--weight-decay", c.weight_decay);
    cmd->add_option("--label-grad-accum", c.label_grad_accum);
}

xmc::EncoderParams make_encoder(const std::string& embeddings_path, uint32_t dim,
                                uint32_t num_features, uint64_t seed) {
    xmc::EncoderParams enc;
    if (!embeddings_path.empty()) {
        enc.mode = xmc::EncoderMode::Precomputed;
        enc.precomputed = xmc::load_embeddings(embeddings_path);
        enc.dim = static_cast<uint32_t>(enc.precomputed.cols());
    } else {
        enc.mode = xmc::EncoderMode::Linear;
        enc.dim = dim;
        enc.projection = xmc::Matrix(num_features, dim);
        xmc::Rng rng(seed);
        double scale = 1.0 / std::sqrt(static_cast<double>(num_features));
        for (double& v : enc.projection.data()) v = scale * rng.next_gaussian();
    }
    return enc;
}

std::vector<xmc::StaticRep> all_reps(const xmc::Dataset& ds, const xmc::EncoderParams& enc) {
    std::vector<xmc::StaticRep> reps(ds.num_points);
    for (uint32_t i = 0; i < ds.num_points; ++i)
        reps[i] = xmc::static_rep(ds.features[i], xmc::encode(enc, ds.features[i], i));
    return reps;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learnable graph-index training and inference for extreme "
                 "multi-label classification"};
    app.require_subcommand(1);

    xmc::TrainConfig cfg;
    std::string data_path, test_path, embeddings_path, output_path, checkpoint_path;
    std::string adjacency_path, partition_path, ranker_path, calibration_path;
    std::string pred_path, truth_path;
    std::vector<std::string> pred_paths;
    std::string k_list = "1,3,5";
    uint32_t dim = 64, topk = 100;
    unsigned threads = 0;
    double threshold = 0.01, reg = 1.0;
    bool normalized_psp = false;

    CLI::App* ingest = app.add_subcommand("ingest", "validate and canonicalize a dataset");
    ingest->add_option("--input", data_path)->required();
    ingest->add_option("--output", output_path)->required();

    CLI::App* cluster = app.add_subcommand("cluster", "balanced recursive label clustering");
    cluster->add_option("--data", data_path)->required();
    cluster->add_option("--embeddings", embeddings_path);
    cluster->add_option("--dim", dim, "linear encoder dim when no embeddings");
    cluster->add_option("--output", output_path)->required();
    add_train_flags(cluster, cfg);

    CLI::App* stage1 = app.add_subcommand("train-stage1", "train with the fixed partition");
    stage1->add_option("--data", data_path)->required();
    stage1->add_option("--partition", partition_path)->required();
    stage1->add_option("--embeddings", embeddings_path);
    stage1->add_option("--dim", dim);
    stage1->add_option("--output", output_path)->required();
    add_train_flags(stage1, cfg);

    CLI::App* initadj = app.add_subcommand("init-adjacency",
                                           "build the learnable adjacency support");
    initadj->add_option("--checkpoint", checkpoint_path)->required();
    initadj->add_option("--data", data_path)->required();
    initadj->add_option("--output", output_path)->required();
    initadj->add_option("--kappa", cfg.kappa);

    CLI::App* stage2 = app.add_subcommand("train-stage2", "joint training, frozen support");
    stage2->add_option("--checkpoint", checkpoint_path)->required();
    stage2->add_option("--adjacency", adjacency_path)->required();
    stage2->add_option("--data", data_path)->required();
    stage2->add_option("--output", output_path)->required();

    CLI::App* predict_cmd = app.add_subcommand("predict", "beam-search inference");
    predict_cmd->add_option("--checkpoint", checkpoint_path)->required();
    predict_cmd->add_option("--data", data_path)->required();
    predict_cmd->add_option("--k", topk);
    predict_cmd->add_option("--threads", threads);
    predict_cmd->add_option("--output", output_path)->required();

    CLI::App* ranker_cmd = app.add_subcommand("train-ranker", "per-label sparse re-scorers");
    ranker_cmd->add_option("--checkpoint", checkpoint_path)->required();
    ranker_cmd->add_option("--data", data_path)->required();
    ranker_cmd->add_option("--reg", reg);
    ranker_cmd->add_option("--threads", threads);
    ranker_cmd->add_option("--output", output_path)->required();

    CLI::App* calibrate = app.add_subcommand("calibrate", "fit the score calibration tree");
    calibrate->add_option("--checkpoint", checkpoint_path)->required();
    calibrate->add_option("--data", data_path)->required();
    calibrate->add_option("--ranker", ranker_path)->required();
    calibrate->add_option("--threads", threads);
    calibrate->add_option("--output", output_path)->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "ranking metrics as JSON");
    evaluate->add_option("--pred", pred_path)->required();
    evaluate->add_option("--truth", truth_path)->required();
    evaluate->add_option("--k", k_list, "comma-separated cutoffs");
    evaluate->add_flag("--normalized-psp", normalized_psp);

    CLI::App* prune = app.add_subcommand("prune", "drop low-score adjacency edges");
    prune->add_option("--checkpoint", checkpoint_path)->required();
    prune->add_option("--threshold", threshold);
    prune->add_option("--output", output_path)->required();

    CLI::App* ensemble = app.add_subcommand("ensemble", "merge prediction files");
    ensemble->add_option("--pred", pred_paths)->required()->expected(-2);
    ensemble->add_option("--output", output_path)->required();

    // TOML-style key = value config per subcommand; command-line flags win
    std::string config_path;
    for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
        sc->add_option("--config", config_path, "key = value config file; flags take precedence");

    // Inject config values as flags before parsing; keys already given on the
    // command line are skipped so explicit flags always take precedence.
    std::vector<std::string> args(argv + 1, argv + argc);
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        CLI::App* sc = args.empty() ? nullptr : app.get_subcommand_no_throw(args[0]);
        if (!sc) break;
        std::ifstream f(args[i + 1]);
        if (!f) {
            std::cerr << "error: cannot open config file " << args[i + 1] << "\n";
            return 1;
        }
        std::string line;
        while (std::getline(f, line)) {
            size_t eq = line.find('=');
            if (eq == std::string::npos || line[0] == '#') continue;
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t\r\"");
                size_t b = s.find_last_not_of(" \t\r\"");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            std::string key = "--" + trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key == "--" || value.empty()) continue;
            if (!sc->get_option_no_throw(key)) continue;  // unknown keys ignored
            bool given = false;
            for (const std::string& a : args)
                if (a == key || a.rfind(key + "=", 0) == 0) given = true;
            if (!given) {
                args.push_back(key);
                args.push_back(value);
            }
        }
        break;
    }
    std::vector<const char*> cargv;
    cargv.push_back(argv[0]);
    for (const std::string& a : args) cargv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) {
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::write_xmc_dataset(ds, output_path);
            auto empty = ds.empty_label_points();
            std::cout << "points=" << ds.num_points << " features=" << ds.num_features
                      << " labels=" << ds.num_labels << " empty_label_points=" << empty.size()
                      << "\n";
            write_manifest("ingest", output_path, {data_path}, nlohmann::json::object(), 0);
        } else if (*cluster) {
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            if (cfg.num_clusters == 0)
                throw std::invalid_argument("cluster: --clusters is required");
            xmc::EncoderParams enc =
                make_encoder(embeddings_path, dim, ds.num_features, cfg.seed);
            xmc::Matrix centroids = xmc::label_centroids(ds, all_reps(ds, enc));
            xmc::Partition p = xmc::build_partition(centroids, cfg.num_clusters, cfg.seed);
            xmc::save_partition(p, output_path);
            std::vector<std::string> inputs{data_path};
            if (!embeddings_path.empty()) inputs.push_back(embeddings_path);
            write_manifest("cluster", output_path, inputs, config_json(cfg), cfg.seed);
        } else if (*stage1) {
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::Partition p = xmc::load_partition(partition_path);
            cfg.num_clusters = p.num_clusters;
            xmc::EncoderMode mode = embeddings_path.empty() ? xmc::EncoderMode::Linear
                                                            : xmc::EncoderMode::Precomputed;
            uint32_t enc_dim = dim;
            xmc::Matrix emb;
            if (mode == xmc::EncoderMode::Precomputed) {
                emb = xmc::load_embeddings(embeddings_path);
                enc_dim = static_cast<uint32_t>(emb.cols());
            }
            xmc::ModelParams init = xmc::init_model(ds, cfg, mode, enc_dim, cfg.seed);
            if (mode == xmc::EncoderMode::Precomputed)
                init.encoder.precomputed = std::move(emb);
            xmc::Checkpoint ck = xmc::train_stage1(ds, cfg, p, std::move(init));
            if (ck.diverged) throw std::runtime_error("train-stage1: training diverged");
            xmc::save_checkpoint(ck, output_path);
            std::vector<std::string> inputs{data_path, partition_path};
            if (!embeddings_path.empty()) inputs.push_back(embeddings_path);
            write_manifest("train-stage1", output_path, inputs, config_json(cfg), cfg.seed);
        } else if (*initadj) {
            xmc::Checkpoint ck = xmc::load_checkpoint(checkpoint_path);
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            uint32_t kappa = cfg.kappa ? cfg.kappa : ck.config.kappa;
            if (kappa == 0)
                kappa = std::max<uint32_t>(1, 10u * ds.num_labels / ck.config.num_clusters);
            xmc::AdjacencyMatrix adj = xmc::init_adjacency(
                ck.model.encoder, ck.model.cluster_classifiers, ck.config.alpha, ds,
                ck.config.beam, kappa, ck.partition, ck.config.seed);
            xmc::save_adjacency(adj, output_path);
            write_manifest("init-adjacency", output_path, {checkpoint_path, data_path},
                           config_json(ck.config), ck.config.seed);
        } else if (*stage2) {
            std::ifstream probe(adjacency_path, std::ios::binary);
            if (!probe)
                throw std::runtime_error(
                    "train-stage2: adjacency artifact '" + adjacency_path +
                    "' not found; run init-adjacency first");
            probe.close();
            xmc::Checkpoint ck1 = xmc::load_checkpoint(checkpoint_path);
            if (ck1.stage != xmc::Stage::One)
                throw std::runtime_error("train-stage2: checkpoint is not a stage-1 artifact");
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::AdjacencyMatrix adj = xmc::load_adjacency(adjacency_path);
            xmc::Checkpoint ck2 = xmc::train_stage2(ck1, adj, ds);
            if (ck2.diverged) throw std::runtime_error("train-stage2: training diverged");
            xmc::save_checkpoint(ck2, output_path);
            write_manifest("train-stage2", output_path,
                           {checkpoint_path, adjacency_path, data_path},
                           config_json(ck1.config), ck1.config.seed);
        } else if (*predict_cmd) {
            xmc::Checkpoint ck = xmc::load_checkpoint(checkpoint_path);
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::Predictions preds =
                xmc::predict(ck.model, ck.config, ds, topk, xmc::resolve_threads(threads));
            xmc::save_predictions(preds, output_path);
            write_manifest("predict", output_path, {checkpoint_path, data_path},
                           config_json(ck.config), ck.config.seed);
        } else if (*ranker_cmd) {
            xmc::Checkpoint ck = xmc::load_checkpoint(checkpoint_path);
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::RankerWeights w = xmc::train_ranker(ds, ck.model, ck.config, reg,
                                                     xmc::resolve_threads(threads));
            xmc::save_ranker(w, output_path);
            write_manifest("train-ranker", output_path, {checkpoint_path, data_path},
                           config_json(ck.config), ck.config.seed);
        } else if (*calibrate) {
            xmc::Checkpoint ck = xmc::load_checkpoint(checkpoint_path);
            xmc::Dataset ds = xmc::load_xmc_dataset(data_path);
            xmc::RankerWeights w = xmc::load_ranker(ranker_path);
            unsigned nthreads = xmc::resolve_threads(threads);
            xmc::Predictions preds = xmc::predict(ck.model, ck.config, ds, 100, nthreads);
            std::vector<uint32_t> freq = ds.label_frequencies();
            std::vector<xmc::CalibrationSample> samples;
            for (uint32_t i = 0; i < ds.num_points; ++i) {
                xmc::SparseVector psi = xmc::ranker_features(ds, ck.model.encoder, i);
                auto labels = ds.labels_of(i);
                for (size_t j = 0; j < preds[i].labels.size(); ++j) {
                    uint32_t l = preds[i].labels[j];
                    xmc::CalibrationSample s;
                    s.retrieval_score = preds[i].scores[j];
                    s.ranker_score = xmc::ranker_score(w, l, psi);
                    s.label_freq = static_cast<double>(freq[l]);
                    s.relevant = std::binary_search(labels.begin(), labels.end(), l) ? 1 : 0;
                    samples.push_back(s);
                }
            }
            xmc::CalibrationTree tree = xmc::fit_calibration(samples);
            xmc::save_calibration(tree, output_path);
            write_manifest("calibrate", output_path, {checkpoint_path, data_path, ranker_path},
                           config_json(ck.config), ck.config.seed);
        } else if (*evaluate) {
            xmc::Predictions preds = xmc::load_predictions(pred_path);
            xmc::Dataset truth = xmc::load_xmc_dataset(truth_path);
            xmc::PropensityModel prop = xmc::compute_propensities(truth);
            nlohmann::json out = nlohmann::json::object();
            std::istringstream ks(k_list);
            std::string tok;
            while (std::getline(ks, tok, ',')) {
                uint32_t k = static_cast<uint32_t>(std::stoul(tok));
                out["P@" + tok] = xmc::precision_at_k(preds, truth, k);
                out["R@" + tok] = xmc::recall_at_k(preds, truth, k);
                out["nDCG@" + tok] = xmc::ndcg_at_k(preds, truth, k);
                out["PSP@" + tok] =
                    xmc::psp_at_k(preds, truth, prop.propensities, k, normalized_psp);
            }
            std::cout << out.dump(2) << "\n";
        } else if (*prune) {
            xmc::Checkpoint ck = xmc::load_checkpoint(checkpoint_path);
            xmc::PruneResult pr =
                xmc::prune_threshold(ck.model.adjacency, ck.config.beta, threshold);
            std::cout << "pruned_fraction=" << pr.pruned_fraction
                      << " orphaned_labels=" << pr.orphaned_labels.size() << "\n";
            ck.model.adjacency = pr.adjacency;
            xmc::save_checkpoint(ck, output_path);
            write_manifest("prune", output_path, {checkpoint_path}, config_json(ck.config),
                           ck.config.seed);
        } else if (*ensemble) {
            std::vector<xmc::Predictions> runs;
            for (const std::string& p : pred_paths) runs.push_back(xmc::load_predictions(p));
            xmc::Predictions merged = xmc::merge_ensemble(runs);
            xmc::save_predictions(merged, output_path);
            write_manifest("ensemble", output_path, pred_paths, nlohmann::json::object(), 0);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
