#include "ibsignal/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace ibsignal {

Mlp Mlp::init(const std::vector<int>& layer_sizes, RandomSource& rng) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp::init: need at least one layer");
    Mlp mlp;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        // Xavier-style scale keeps tanh units in their active range at init.
        const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
        Tensor w = Tensor::zeros({fan_out, fan_in});
        for (double& v : w.data) v = stddev * rng.normal();
        mlp.weights.push_back(std::move(w));
        mlp.biases.push_back(Tensor::zeros({fan_out}));
    }
    return mlp;
}

void Mlp::collect_params(std::vector<Tensor*>& out) {
    for (size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
}

void Mlp::collect_params(const std::string& prefix,
                         std::vector<std::pair<std::string, Tensor*>>& out) {
    for (size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(prefix + ".w" + std::to_string(l), &weights[l]);
        out.emplace_back(prefix + ".b" + std::to_string(l), &biases[l]);
    }
}

TapedMlp register_mlp(Tape& tape, const Mlp& mlp) {
    TapedMlp taped;
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        taped.weights.push_back(tape.leaf(mlp.weights[l]));
        taped.biases.push_back(tape.leaf(mlp.biases[l]));
    }
    return taped;
}

NodeId mlp_forward(Tape& tape, const TapedMlp& taped, NodeId x) {
    NodeId h = x;
    const size_t last = taped.weights.size() - 1;
    for (size_t l = 0; l < taped.weights.size(); ++l) {
        h = tape.affine(taped.weights[l], taped.biases[l], h);
        if (l != last) h = tape.tanh_(h);
    }
    return h;
}

Tensor mlp_eval(const Mlp& mlp, const Tensor& x) {
    Tensor h = x;
    const size_t last = mlp.weights.size() - 1;
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        const Tensor& w = mlp.weights[l];
        const Tensor& b = mlp.biases[l];
        if (h.size() != w.shape[1]) throw std::invalid_argument("mlp_eval: input size mismatch");
        Tensor y = Tensor::zeros({w.shape[0]});
        const int m = w.shape[0], n = w.shape[1];
        for (int i = 0; i < m; ++i) {
            double acc = b.data[static_cast<size_t>(i)];
            const double* wrow = w.data.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) acc += wrow[j] * h.data[static_cast<size_t>(j)];
            y.data[static_cast<size_t>(i)] = acc;
        }
        if (l != last)
            for (double& v : y.data) v = std::tanh(v);
        h = std::move(y);
    }
    return h;
}

}  // namespace ibsignal
