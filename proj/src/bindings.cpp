#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xmc/analysis.hpp"
#include "xmc/clustering.hpp"
#include "xmc/dataset.hpp"
#include "xmc/metrics.hpp"
#include "xmc/model.hpp"
#include "xmc/synthetic.hpp"
#include "xmc/train.hpp"

namespace py = pybind11;
using namespace xmc;

PYBIND11_MODULE(xmcindex_py, m) {
    m.doc() = "graph-index training and inference for extreme multi-label classification";

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("num_points", &Dataset::num_points)
        .def_readonly("num_features", &Dataset::num_features)
        .def_readonly("num_labels", &Dataset::num_labels)
        .def("labels_of", &Dataset::labels_of)
        .def("label_frequencies", &Dataset::label_frequencies);
    m.def("load_dataset", &load_xmc_dataset);
    m.def("write_dataset", &write_xmc_dataset);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("beta", &TrainConfig::beta)
        .def_readwrite("kappa", &TrainConfig::kappa)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("shortlist_k", &TrainConfig::shortlist_k)
        .def_readwrite("beam", &TrainConfig::beam)
        .def_readwrite("num_clusters", &TrainConfig::num_clusters)
        .def_readwrite("stage1_epochs", &TrainConfig::stage1_epochs)
        .def_readwrite("stage2_epochs", &TrainConfig::stage2_epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("lr_classifiers", &TrainConfig::lr_classifiers)
        .def_readwrite("lr_encoder", &TrainConfig::lr_encoder)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("label_grad_accum", &TrainConfig::label_grad_accum);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("diverged", &Checkpoint::diverged)
        .def_property_readonly("stage",
                               [](const Checkpoint& c) { return static_cast<int>(c.stage); });
    m.def("save_checkpoint", &save_checkpoint);
    m.def("load_checkpoint", &load_checkpoint);

    m.def(
        "train_full",
        [](const Dataset& ds, TrainConfig cfg, uint32_t encoder_dim) {
            return train_full(ds, cfg, EncoderMode::Linear, encoder_dim);
        },
        py::arg("dataset"), py::arg("config"), py::arg("encoder_dim") = 64);

    py::class_<RankedPrediction>(m, "RankedPrediction")
        .def_readonly("labels", &RankedPrediction::labels)
        .def_readonly("scores", &RankedPrediction::scores);
    m.def(
        "predict",
        [](const Checkpoint& ck, const Dataset& ds, uint32_t top_k, unsigned threads) {
            return predict(ck.model, ck.config, ds, top_k, threads);
        },
        py::arg("checkpoint"), py::arg("dataset"), py::arg("top_k") = 100,
        py::arg("threads") = 1);
    m.def("save_predictions", &save_predictions);
    m.def("load_predictions", &load_predictions);

    m.def("precision_at_k", &precision_at_k);
    m.def("recall_at_k", &recall_at_k);
    m.def("ndcg_at_k", &ndcg_at_k);
    m.def("psp_at_k", &psp_at_k, py::arg("pred"), py::arg("truth"), py::arg("propensities"),
          py::arg("k"), py::arg("normalized") = false);
    m.def("compute_propensities",
          [](const Dataset& ds) { return compute_propensities(ds).propensities; });

    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("num_labels", &SyntheticSpec::num_labels)
        .def_readwrite("num_regions", &SyntheticSpec::num_regions)
        .def_readwrite("features_per_region", &SyntheticSpec::features_per_region)
        .def_readwrite("train_points", &SyntheticSpec::train_points)
        .def_readwrite("test_points", &SyntheticSpec::test_points)
        .def_readwrite("labels_per_point", &SyntheticSpec::labels_per_point)
        .def_readwrite("bimodal_fraction", &SyntheticSpec::bimodal_fraction)
        .def_readwrite("noise", &SyntheticSpec::noise)
        .def_readwrite("seed", &SyntheticSpec::seed);
    py::class_<SyntheticData>(m, "SyntheticData")
        .def_readonly("train", &SyntheticData::train)
        .def_readonly("test", &SyntheticData::test)
        .def_readonly("bimodal", &SyntheticData::bimodal);
    m.def("make_synthetic", &make_synthetic);
}
