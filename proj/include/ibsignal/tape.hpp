// Reverse-mode autodiff on a flat tape. Nodes are appended in evaluation
// order, which is also a topological order, so backward() is a single reverse
// sweep. Gradients accumulate additively into each node, so a value feeding
// several consumers receives the sum of its upstream gradients.
//
// Scope is deliberately small: rank-<=2 tensors, no broadcasting, just the
// primitives needed for the perceptrons, the Gaussian reparameterization and
// the straight-through discretization used by the agents.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ibsignal/random.hpp"
#include "ibsignal/tensor.hpp"

namespace ibsignal {

using NodeId = int;

class Tape {
public:
    // Differentiable input (parameter); gradient is accumulated and readable.
    NodeId leaf(const Tensor& value);
    // Non-differentiable input; gradient is accumulated but never consumed.
    NodeId constant(const Tensor& value);

    // y = W x + b with W:[m x n], b:[m], x:[n].
    NodeId affine(NodeId w, NodeId b, NodeId x);

    NodeId relu(NodeId x);
    NodeId tanh_(NodeId x);
    NodeId exp_(NodeId x);
    NodeId log_(NodeId x);  // input must be positive
    NodeId square(NodeId x);
    NodeId softmax(NodeId x);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  // elementwise
    NodeId scale(NodeId x, double c);
    NodeId add_scalar(NodeId x, double c);
    NodeId clamp_min(NodeId x, double bound);

    NodeId sum(NodeId x);                 // -> scalar
    NodeId mean(NodeId x);                // -> scalar
    NodeId pick(NodeId x, int index);     // vector element -> scalar
    NodeId concat(NodeId a, NodeId b);    // vectors
    NodeId row(NodeId m, int index);      // matrix row -> vector
    NodeId slice(NodeId x, int start, int len);  // vector slice

    // Forward value is `replacement`; backward copies the incoming gradient
    // to `src` unchanged (straight-through estimator).
    NodeId replace_value(NodeId src, const Tensor& replacement);
    // Forward copy, backward blocked.
    NodeId stop_gradient(NodeId x);

    // Reverse sweep from a scalar root. Resets all gradient accumulators.
    void backward(NodeId root);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor& grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    enum class Op : uint8_t {
        Leaf,
        Constant,
        Affine,
        Relu,
        Tanh,
        Exp,
        Log,
        Square,
        Softmax,
        Add,
        Sub,
        Mul,
        Scale,
        AddScalar,
        ClampMin,
        Sum,
        Mean,
        Pick,
        Concat,
        Row,
        Slice,
        ReplaceValue,
        StopGradient,
    };

    struct Node {
        Op op;
        std::array<NodeId, 3> in{-1, -1, -1};
        double scalar = 0.0;  // scale factor / added constant / clamp bound
        int index = 0;        // pick / row index
        Tensor value;
        Tensor grad;
    };

    NodeId push(Node node);
    void backward_node(NodeId id);
    const Tensor& val(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
    Tensor& grd(NodeId id) { return nodes_[static_cast<size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

// z = mu + exp(log_var / 2) * eps with eps ~ N(0, I) recorded as a constant,
// so gradients flow to mu and log_var through the reparameterization.
NodeId gaussian_sample(Tape& tape, NodeId mu, NodeId log_var, RandomSource& rng);

}  // namespace ibsignal
