#pragma once

#include <cstdint>
#include <vector>

#include "xmc/grad.hpp"
#include "xmc/model.hpp"

namespace xmc {

struct AdamWOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    uint32_t accum_period = 1;  // apply every k-th step, gradients summed meanwhile
};

// Decoupled weight decay Adam over the four parameter groups. The label
// classifier group supports gradient accumulation (update every k steps).
class AdamW {
public:
    AdamW(const ModelParams& model, const TrainConfig& config);

    void step(ModelParams& model, const Gradients& grads);

    uint64_t steps() const { return step_count_; }

private:
    struct GroupState {
        AdamWOptions opts;
        std::vector<double> m, v, accum;
        uint64_t updates = 0;

        void init(size_t n, const AdamWOptions& o) {
            opts = o;
            m.assign(n, 0.0);
            v.assign(n, 0.0);
            accum.assign(n, 0.0);
        }
        void apply(double* params, const double* grads, size_t n, uint64_t step);
    };

    GroupState projection_, cluster_, label_, adjacency_;
    std::vector<size_t> adjacency_offsets_;
    uint64_t step_count_ = 0;
};

}  // namespace xmc
