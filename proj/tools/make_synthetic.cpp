// Writes the bundled synthetic benchmark (train/test splits plus the list of
// planted two-mode labels) in the text dataset format.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xmc/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic multi-region benchmark generator"};
    xmc::SyntheticSpec spec;
    std::string out_prefix = "synthetic";
    app.add_option("--labels", spec.num_labels);
    app.add_option("--regions", spec.num_regions);
    app.add_option("--features-per-region", spec.features_per_region);
    app.add_option("--train-points", spec.train_points);
    app.add_option("--test-points", spec.test_points);
    app.add_option("--labels-per-point", spec.labels_per_point);
    app.add_option("--bimodal-fraction", spec.bimodal_fraction);
    app.add_option("--noise", spec.noise);
    app.add_option("--seed", spec.seed);
    app.add_option("--output", out_prefix, "file prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        xmc::SyntheticData data = xmc::make_synthetic(spec);
        xmc::write_xmc_dataset(data.train, out_prefix + ".train.txt");
        xmc::write_xmc_dataset(data.test, out_prefix + ".test.txt");
        std::ofstream bi(out_prefix + ".bimodal.txt");
        for (uint32_t l = 0; l < spec.num_labels; ++l)
            if (data.bimodal[l]) bi << l << "\n";
        std::cout << "wrote " << out_prefix << ".{train,test,bimodal}.txt\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
