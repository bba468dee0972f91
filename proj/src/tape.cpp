#include "ibsignal/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace ibsignal {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

NodeId Tape::push(Node node) {
    node.grad = Tensor::zeros(node.value.shape);
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId Tape::leaf(const Tensor& value) {
    Node n;
    n.op = Op::Leaf;
    n.value = value;
    return push(std::move(n));
}

NodeId Tape::constant(const Tensor& value) {
    Node n;
    n.op = Op::Constant;
    n.value = value;
    return push(std::move(n));
}

NodeId Tape::affine(NodeId w, NodeId b, NodeId x) {
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    const Tensor& xv = val(x);
    require(wv.shape.size() == 2, "affine: W must be rank 2");
    const int m = wv.shape[0], n = wv.shape[1];
    require(bv.size() == m, "affine: bias length must match W rows");
    require(xv.size() == n, "affine: input length must match W cols");

    Node node;
    node.op = Op::Affine;
    node.in = {w, b, x};
    node.value = Tensor::zeros({m});
    const double* wp = wv.data.data();
    const double* xp = xv.data.data();
    for (int i = 0; i < m; ++i) {
        double acc = bv.data[static_cast<size_t>(i)];
        const double* wrow = wp + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += wrow[j] * xp[j];
        node.value.data[static_cast<size_t>(i)] = acc;
    }
    return push(std::move(node));
}

NodeId Tape::relu(NodeId x) {
    Node n;
    n.op = Op::Relu;
    n.in[0] = x;
    n.value = val(x);
    for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

NodeId Tape::tanh_(NodeId x) {
    Node n;
    n.op = Op::Tanh;
    n.in[0] = x;
    n.value = val(x);
    for (double& v : n.value.data) v = std::tanh(v);
    return push(std::move(n));
}

NodeId Tape::exp_(NodeId x) {
    Node n;
    n.op = Op::Exp;
    n.in[0] = x;
    n.value = val(x);
    for (double& v : n.value.data) v = std::exp(v);
    return push(std::move(n));
}

NodeId Tape::log_(NodeId x) {
    Node n;
    n.op = Op::Log;
    n.in[0] = x;
    n.value = val(x);
    for (double& v : n.value.data) {
        require(v > 0.0, "log: input must be positive");
        v = std::log(v);
    }
    return push(std::move(n));
}

NodeId Tape::square(NodeId x) {
    Node n;
    n.op = Op::Square;
    n.in[0] = x;
    n.value = val(x);
    for (double& v : n.value.data) v = v * v;
    return push(std::move(n));
}

NodeId Tape::softmax(NodeId x) {
    Node n;
    n.op = Op::Softmax;
    n.in[0] = x;
    n.value = val(x);
    double mx = n.value.data[0];
    for (double v : n.value.data) mx = std::max(mx, v);
    double total = 0.0;
    for (double& v : n.value.data) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : n.value.data) v /= total;
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    require(val(a).same_shape(val(b)), "add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.in = {a, b, -1};
    n.value = val(a);
    const Tensor& bv = val(b);
    for (int i = 0; i < n.value.size(); ++i) n.value.data[static_cast<size_t>(i)] += bv.data[static_cast<size_t>(i)];
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    require(val(a).same_shape(val(b)), "sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.in = {a, b, -1};
    n.value = val(a);
    const Tensor& bv = val(b);
    for (int i = 0; i < n.value.size(); ++i) n.value.data[static_cast<size_t>(i)] -= bv.data[static_cast<size_t>(i)];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    require(val(a).same_shape(val(b)), "mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.in = {a, b, -1};
    n.value = val(a);
    const Tensor& bv = val(b);
    for (int i = 0; i < n.value.size(); ++i) n.value.data[static_cast<size_t>(i)] *= bv.data[static_cast<size_t>(i)];
    return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double c) {
    Node n;
    n.op = Op::Scale;
    n.in[0] = x;
    n.scalar = c;
    n.value = val(x);
    for (double& v : n.value.data) v *= c;
    return push(std::move(n));
}

NodeId Tape::add_scalar(NodeId x, double c) {
    Node n;
    n.op = Op::AddScalar;
    n.in[0] = x;
    n.scalar = c;
    n.value = val(x);
    for (double& v : n.value.data) v += c;
    return push(std::move(n));
}

NodeId Tape::clamp_min(NodeId x, double bound) {
    Node n;
    n.op = Op::ClampMin;
    n.in[0] = x;
    n.scalar = bound;
    n.value = val(x);
    for (double& v : n.value.data) v = v < bound ? bound : v;
    return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
    Node n;
    n.op = Op::Sum;
    n.in[0] = x;
    double acc = 0.0;
    for (double v : val(x).data) acc += v;
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Tape::mean(NodeId x) {
    Node n;
    n.op = Op::Mean;
    n.in[0] = x;
    double acc = 0.0;
    for (double v : val(x).data) acc += v;
    n.value = Tensor::scalar(acc / val(x).size());
    return push(std::move(n));
}

NodeId Tape::pick(NodeId x, int index) {
    require(index >= 0 && index < val(x).size(), "pick: index out of range");
    Node n;
    n.op = Op::Pick;
    n.in[0] = x;
    n.index = index;
    n.value = Tensor::scalar(val(x).data[static_cast<size_t>(index)]);
    return push(std::move(n));
}

NodeId Tape::concat(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Concat;
    n.in = {a, b, -1};
    std::vector<double> data = val(a).data;
    data.insert(data.end(), val(b).data.begin(), val(b).data.end());
    n.value = Tensor::vec(std::move(data));
    return push(std::move(n));
}

NodeId Tape::row(NodeId m, int index) {
    const Tensor& mv = val(m);
    require(mv.shape.size() == 2, "row: input must be rank 2");
    require(index >= 0 && index < mv.shape[0], "row: index out of range");
    Node n;
    n.op = Op::Row;
    n.in[0] = m;
    n.index = index;
    const int c = mv.shape[1];
    std::vector<double> data(mv.data.begin() + static_cast<size_t>(index) * c,
                             mv.data.begin() + static_cast<size_t>(index + 1) * c);
    n.value = Tensor::vec(std::move(data));
    return push(std::move(n));
}

NodeId Tape::slice(NodeId x, int start, int len) {
    require(val(x).shape.size() == 1, "slice: input must be a vector");
    require(start >= 0 && len >= 1 && start + len <= val(x).size(), "slice: range out of bounds");
    Node n;
    n.op = Op::Slice;
    n.in[0] = x;
    n.index = start;
    std::vector<double> data(val(x).data.begin() + start, val(x).data.begin() + start + len);
    n.value = Tensor::vec(std::move(data));
    return push(std::move(n));
}

NodeId Tape::replace_value(NodeId src, const Tensor& replacement) {
    require(val(src).same_shape(replacement), "replace_value: shape mismatch");
    Node n;
    n.op = Op::ReplaceValue;
    n.in[0] = src;
    n.value = replacement;
    return push(std::move(n));
}

NodeId Tape::stop_gradient(NodeId x) {
    Node n;
    n.op = Op::StopGradient;
    n.in[0] = x;
    n.value = val(x);
    return push(std::move(n));
}

void Tape::backward(NodeId root) {
    require(root >= 0 && root < size(), "backward: bad root id");
    require(val(root).size() == 1, "backward: root must be scalar");
    for (Node& n : nodes_)
        for (double& g : n.grad.data) g = 0.0;
    grd(root).data[0] = 1.0;
    for (NodeId id = root; id >= 0; --id) backward_node(id);
}

void Tape::backward_node(NodeId id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    const Tensor& g = n.grad;
    switch (n.op) {
        case Op::Leaf:
        case Op::Constant:
            break;
        case Op::Affine: {
            Tensor& gw = grd(n.in[0]);
            Tensor& gb = grd(n.in[1]);
            Tensor& gx = grd(n.in[2]);
            const Tensor& wv = val(n.in[0]);
            const Tensor& xv = val(n.in[2]);
            const int m = wv.shape[0], cols = wv.shape[1];
            for (int i = 0; i < m; ++i) {
                const double gi = g.data[static_cast<size_t>(i)];
                if (gi == 0.0) continue;
                gb.data[static_cast<size_t>(i)] += gi;
                double* gwrow = gw.data.data() + static_cast<size_t>(i) * cols;
                const double* wrow = wv.data.data() + static_cast<size_t>(i) * cols;
                const double* xp = xv.data.data();
                double* gxp = gx.data.data();
                for (int j = 0; j < cols; ++j) {
                    gwrow[j] += gi * xp[j];
                    gxp[j] += gi * wrow[j];
                }
            }
            break;
        }
        case Op::Relu: {
            Tensor& gx = grd(n.in[0]);
            const Tensor& xv = val(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                if (xv.data[static_cast<size_t>(i)] > 0.0) gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Tanh: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i) {
                const double y = n.value.data[static_cast<size_t>(i)];
                gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * (1.0 - y * y);
            }
            break;
        }
        case Op::Exp: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * n.value.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Log: {
            Tensor& gx = grd(n.in[0]);
            const Tensor& xv = val(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] / xv.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Square: {
            Tensor& gx = grd(n.in[0]);
            const Tensor& xv = val(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * 2.0 * xv.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Softmax: {
            Tensor& gx = grd(n.in[0]);
            double dot = 0.0;
            for (int i = 0; i < g.size(); ++i) dot += g.data[static_cast<size_t>(i)] * n.value.data[static_cast<size_t>(i)];
            for (int i = 0; i < g.size(); ++i) {
                const double s = n.value.data[static_cast<size_t>(i)];
                gx.data[static_cast<size_t>(i)] += s * (g.data[static_cast<size_t>(i)] - dot);
            }
            break;
        }
        case Op::Add: {
            Tensor& ga = grd(n.in[0]);
            Tensor& gb = grd(n.in[1]);
            for (int i = 0; i < g.size(); ++i) {
                ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
                gb.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            }
            break;
        }
        case Op::Sub: {
            Tensor& ga = grd(n.in[0]);
            Tensor& gb = grd(n.in[1]);
            for (int i = 0; i < g.size(); ++i) {
                ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
                gb.data[static_cast<size_t>(i)] -= g.data[static_cast<size_t>(i)];
            }
            break;
        }
        case Op::Mul: {
            Tensor& ga = grd(n.in[0]);
            Tensor& gb = grd(n.in[1]);
            const Tensor& av = val(n.in[0]);
            const Tensor& bv = val(n.in[1]);
            for (int i = 0; i < g.size(); ++i) {
                ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * bv.data[static_cast<size_t>(i)];
                gb.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * av.data[static_cast<size_t>(i)];
            }
            break;
        }
        case Op::Scale: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i) gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)] * n.scalar;
            break;
        }
        case Op::AddScalar: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i) gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::ClampMin: {
            Tensor& gx = grd(n.in[0]);
            const Tensor& xv = val(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                if (xv.data[static_cast<size_t>(i)] > n.scalar) gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Sum: {
            Tensor& gx = grd(n.in[0]);
            const double gs = g.data[0];
            for (double& v : gx.data) v += gs;
            break;
        }
        case Op::Mean: {
            Tensor& gx = grd(n.in[0]);
            const double gs = g.data[0] / gx.size();
            for (double& v : gx.data) v += gs;
            break;
        }
        case Op::Pick: {
            grd(n.in[0]).data[static_cast<size_t>(n.index)] += g.data[0];
            break;
        }
        case Op::Concat: {
            Tensor& ga = grd(n.in[0]);
            Tensor& gb = grd(n.in[1]);
            const int na = ga.size();
            for (int i = 0; i < na; ++i) ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            for (int i = 0; i < gb.size(); ++i) gb.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(na + i)];
            break;
        }
        case Op::Row: {
            Tensor& gm = grd(n.in[0]);
            const int c = gm.cols();
            double* dst = gm.data.data() + static_cast<size_t>(n.index) * c;
            for (int i = 0; i < c; ++i) dst[i] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::Slice: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i)
                gx.data[static_cast<size_t>(n.index + i)] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::ReplaceValue: {
            Tensor& gx = grd(n.in[0]);
            for (int i = 0; i < g.size(); ++i) gx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
            break;
        }
        case Op::StopGradient:
            break;
    }
}

NodeId gaussian_sample(Tape& tape, NodeId mu, NodeId log_var, RandomSource& rng) {
    if (!tape.value(mu).same_shape(tape.value(log_var)))
        throw std::invalid_argument("gaussian_sample: mu / log_var shape mismatch");
    const int d = tape.value(mu).size();
    Tensor eps = Tensor::zeros({d});
    for (double& v : eps.data) v = rng.normal();
    const NodeId std_dev = tape.exp_(tape.scale(log_var, 0.5));
    return tape.add(mu, tape.mul(std_dev, tape.constant(eps)));
}

}  // namespace ibsignal
