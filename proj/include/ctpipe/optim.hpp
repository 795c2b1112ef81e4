#ifndef CTPIPE_OPTIM_HPP_
#define CTPIPE_OPTIM_HPP_

#include <vector>

#include "ctpipe/tensor.hpp"

namespace ctpipe {

// Loss on a sigmoid output: mean over elements of
// -[t ln p + (1-t) ln(1-p)], predictions clamped to [1e-7, 1-1e-7].
float bce_loss(const Tensor& pred, const Tensor& target);

// Gradient of bce_loss w.r.t. pred; zero where the clamp was active.
Tensor bce_loss_backward(const Tensor& pred, const Tensor& target);

// Adam accumulator state; beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;

    AdamState() = default;
    explicit AdamState(const std::vector<Tensor*>& params);
};

// One bias-corrected Adam update over index-aligned params/grads.
void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
               AdamState& state, float lr);

}  // namespace ctpipe

#endif
