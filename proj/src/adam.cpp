#include "ibsignal/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ibsignal {

AdamState AdamState::init(const std::vector<Tensor*>& params, AdamConfig config) {
    AdamState state;
    state.config = config;
    state.first_moment.reserve(params.size());
    state.second_moment.reserve(params.size());
    for (const Tensor* p : params) {
        state.first_moment.push_back(Tensor::zeros(p->shape));
        state.second_moment.push_back(Tensor::zeros(p->shape));
    }
    return state;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: parameter / gradient / state count mismatch");
    state.step += 1;
    const AdamConfig& c = state.config;
    const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        Tensor& m = state.first_moment[k];
        Tensor& v = state.second_moment[k];
        if (!p.same_shape(g) || !p.same_shape(m))
            throw std::invalid_argument("adam_step: shape mismatch");
        for (size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = c.beta1 * m.data[i] + (1.0 - c.beta1) * g.data[i];
            v.data[i] = c.beta2 * v.data[i] + (1.0 - c.beta2) * g.data[i] * g.data[i];
            const double m_hat = m.data[i] / m_corr;
            const double v_hat = v.data[i] / v_corr;
            p.data[i] -= c.step_size * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

}  // namespace ibsignal
