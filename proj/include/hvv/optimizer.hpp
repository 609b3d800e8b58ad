#pragma once

#include <vector>

#include "hvv/tensor.hpp"

namespace hvv {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;
};

// First/second moment buffers, one pair per parameter, same shapes.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState init(const std::vector<TensorPtr>& params);
};

// One Adam update with bias correction, reading each parameter's accumulated
// grad. Weight decay is decoupled: value -= lr * wd * value before the Adam
// delta. t is 1-based.
void adam_step(const std::vector<TensorPtr>& params, AdamState& state, const AdamConfig& cfg,
               long t);

}  // namespace hvv
