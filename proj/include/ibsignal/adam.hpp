// Adam with bias correction, operating on a fixed list of parameter tensors.
#pragma once

#include <vector>

#include "ibsignal/tensor.hpp"

namespace ibsignal {

struct AdamConfig {
    double step_size = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    long step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;

    static AdamState init(const std::vector<Tensor*>& params, AdamConfig config = {});
};

// One Adam update over all parameters. Shapes of params, grads and the state
// moments must agree; the state step count advances by one.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state);

}  // namespace ibsignal
