#include "ctpipe/optim.hpp"

#include <cmath>

namespace ctpipe {

namespace {
constexpr float kClampLo = 1e-7f;
constexpr float kClampHi = 1.f - 1e-7f;
}  // namespace

float bce_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ShapeError("bce_loss: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const float p = std::min(std::max(pred.data[i], kClampLo), kClampHi);
        const float t = target.data[i];
        sum -= t * std::log(p) + (1.f - t) * std::log(1.f - p);
    }
    return static_cast<float>(sum / double(pred.numel()));
}

Tensor bce_loss_backward(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ShapeError("bce_loss: shape mismatch");
    Tensor dp(pred.shape);
    const float inv_n = 1.f / static_cast<float>(pred.numel());
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const float raw = pred.data[i];
        if (raw < kClampLo || raw > kClampHi) {
            dp.data[i] = 0.f;  // clamp is flat
            continue;
        }
        const float t = target.data[i];
        dp.data[i] = (raw - t) / (raw * (1.f - raw)) * inv_n;
    }
    return dp;
}

AdamState::AdamState(const std::vector<Tensor*>& params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const Tensor* p : params) {
        m.emplace_back(p->shape);
        v.emplace_back(p->shape);
    }
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
               AdamState& state, float lr) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: params/grads/state size mismatch");
    }
    ++state.step;
    const float bc1 = 1.f - std::pow(state.beta1, static_cast<float>(state.step));
    const float bc2 = 1.f - std::pow(state.beta2, static_cast<float>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g)) throw ShapeError("adam_step: grad shape mismatch");
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            m.data[j] = state.beta1 * m.data[j] + (1.f - state.beta1) * g.data[j];
            v.data[j] = state.beta2 * v.data[j] + (1.f - state.beta2) * g.data[j] * g.data[j];
            const float mhat = m.data[j] / bc1;
            const float vhat = v.data[j] / bc2;
            p.data[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace ctpipe
