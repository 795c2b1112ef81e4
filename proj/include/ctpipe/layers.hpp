#ifndef CTPIPE_LAYERS_HPP_
#define CTPIPE_LAYERS_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ctpipe/rng.hpp"
#include "ctpipe/tensor.hpp"

namespace ctpipe {

enum class Mode { Train, Eval };

enum class LayerKind {
    Conv3x3Same,
    BatchNorm,
    ReLU,
    MaxPool2,
    Dense,
    Dropout,
    Sigmoid,
    Flatten,
    UpSample2,
    Concat,
};

const char* layer_kind_name(LayerKind k);

// Structural descriptor of a layer, used for weight-file round trips and
// architecture assertions.
struct LayerSpec {
    LayerKind kind;
    std::vector<int> params;  // meaning depends on kind (channel counts, units, ...)
};

// A differentiable layer. forward caches whatever backward needs; backward
// consumes the cache and accumulates parameter gradients.
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor forward(const Tensor& x, Mode mode, Rng& rng) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;

    virtual LayerKind kind() const = 0;
    virtual LayerSpec spec() const { return {kind(), {}}; }

    // Trainable parameters and their gradient slots, index-aligned.
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    // Everything that must survive a save/load round trip (params plus
    // running statistics).
    virtual std::vector<Tensor*> state() { return params(); }

    void zero_grads() {
        for (Tensor* g : grads()) g->fill(0.f);
    }
};

class Conv3x3Same : public Layer {
public:
    // He-uniform fan-in initialization, bias zero.
    Conv3x3Same(int in_channels, int out_channels, Rng& rng);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Conv3x3Same; }
    LayerSpec spec() const override { return {kind(), {in_channels_, out_channels_}}; }
    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&dweights_, &dbias_}; }

    Tensor weights_;  // [K, C, 3, 3]
    Tensor bias_;     // [K]
    Tensor dweights_;
    Tensor dbias_;

private:
    int in_channels_;
    int out_channels_;
    Tensor cached_input_;
};

// Per-channel batch normalization over (N, H, W) for 4-d input or over N
// for 2-d input. Train mode normalizes with batch statistics and updates
// the running ones with momentum 0.9; eval mode uses the running ones.
class BatchNorm : public Layer {
public:
    explicit BatchNorm(int channels, float epsilon = 1e-5f, float momentum = 0.9f);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::BatchNorm; }
    LayerSpec spec() const override { return {kind(), {channels_}}; }
    std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
    std::vector<Tensor*> grads() override { return {&dgamma_, &dbeta_}; }
    std::vector<Tensor*> state() override {
        return {&gamma_, &beta_, &running_mean_, &running_var_};
    }

    Tensor gamma_, beta_;
    Tensor running_mean_, running_var_;
    Tensor dgamma_, dbeta_;

private:
    int channels_;
    float epsilon_;
    float momentum_;
    // Cached train-mode forward state.
    Tensor cached_xhat_;
    std::vector<float> batch_mean_, batch_invstd_;
    std::size_t per_channel_count_ = 0;
    bool trained_forward_ = false;
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::ReLU; }

private:
    Tensor cached_input_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Sigmoid; }

private:
    Tensor cached_output_;
};

// 2x2 stride-2 max pooling; odd extents are treated as padded with -inf.
// Gradient routes to the first (row-major) maximum of each window.
class MaxPool2 : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::MaxPool2; }

private:
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

class Dense : public Layer {
public:
    Dense(int in_features, int units, Rng& rng);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Dense; }
    LayerSpec spec() const override { return {kind(), {in_features_, units_}}; }
    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&dweights_, &dbias_}; }

    Tensor weights_;  // [F, U]
    Tensor bias_;     // [U]
    Tensor dweights_;
    Tensor dbias_;

private:
    int in_features_;
    int units_;
    Tensor cached_input_;
};

// Inverted dropout: train mode zeroes units with probability `rate` and
// scales survivors by 1/(1-rate); eval mode is the identity.
class Dropout : public Layer {
public:
    explicit Dropout(float rate);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Dropout; }
    LayerSpec spec() const override {
        return {kind(), {static_cast<int>(rate_ * 1000.f + 0.5f)}};
    }

    float rate() const { return rate_; }

private:
    float rate_;
    std::vector<float> cached_scale_;
};

// [N,C,H,W] -> [N, C*H*W].
class Flatten : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Flatten; }

private:
    std::vector<int> in_shape_;
};

// Nearest-neighbour 2x upsampling; backward sums each 2x2 block.
class UpSample2 : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::UpSample2; }

private:
    std::vector<int> in_shape_;
};

// Channel concatenation of two tensors; a two-input node, so it exposes
// forward2/backward2 and rejects the single-input entry points.
class Concat : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    LayerKind kind() const override { return LayerKind::Concat; }

    Tensor forward2(const Tensor& a, const Tensor& b, Mode mode = Mode::Train);
    std::pair<Tensor, Tensor> backward2(const Tensor& dy);

private:
    int a_channels_ = 0;
    int b_channels_ = 0;
};

}  // namespace ctpipe

#endif
