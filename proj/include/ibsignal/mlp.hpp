// Small fully-connected nets with tanh hidden activations and a linear head.
// Two forward paths exist: one building tape nodes for training, one plain
// evaluation used everywhere inference-only. Both share the affine kernel, so
// they produce bit-identical values.
#pragma once

#include <string>
#include <vector>

#include "ibsignal/random.hpp"
#include "ibsignal/tape.hpp"
#include "ibsignal/tensor.hpp"

namespace ibsignal {

struct Mlp {
    // weights[l] is [out x in]; biases[l] is [out]. Hidden layers use tanh,
    // the final layer is linear.
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;

    static Mlp init(const std::vector<int>& layer_sizes, RandomSource& rng);

    int input_dim() const { return weights.front().shape[1]; }
    int output_dim() const { return weights.back().shape[0]; }
    int layer_count() const { return static_cast<int>(weights.size()); }

    void collect_params(std::vector<Tensor*>& out);
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Tensor*>>& out);
};

// Leaf ids of one Mlp registered on a tape; reused across a whole batch so
// per-parameter gradients accumulate over all trials.
struct TapedMlp {
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;
};

TapedMlp register_mlp(Tape& tape, const Mlp& mlp);
NodeId mlp_forward(Tape& tape, const TapedMlp& taped, NodeId x);
Tensor mlp_eval(const Mlp& mlp, const Tensor& x);

}  // namespace ibsignal
