#include "ctpipe/unet.hpp"

namespace ctpipe {

UNet::ConvBlock::ConvBlock(int in_ch, int out_ch, bool with_bn, Rng& rng) {
    conv1 = std::make_unique<Conv3x3Same>(in_ch, out_ch, rng);
    conv2 = std::make_unique<Conv3x3Same>(out_ch, out_ch, rng);
    if (with_bn) {
        bn1 = std::make_unique<BatchNorm>(out_ch);
        bn2 = std::make_unique<BatchNorm>(out_ch);
    }
    relu1 = std::make_unique<ReLU>();
    relu2 = std::make_unique<ReLU>();
}

Tensor UNet::ConvBlock::forward(const Tensor& x, Mode mode, Rng& rng) {
    Tensor t = conv1->forward(x, mode, rng);
    if (bn1) t = bn1->forward(t, mode, rng);
    t = relu1->forward(t, mode, rng);
    t = conv2->forward(t, mode, rng);
    if (bn2) t = bn2->forward(t, mode, rng);
    return relu2->forward(t, mode, rng);
}

Tensor UNet::ConvBlock::backward(const Tensor& dy) {
    Tensor g = relu2->backward(dy);
    if (bn2) g = bn2->backward(g);
    g = conv2->backward(g);
    g = relu1->backward(g);
    if (bn1) g = bn1->backward(g);
    return conv1->backward(g);
}

void UNet::ConvBlock::collect(std::vector<Layer*>& out) {
    out.push_back(conv1.get());
    if (bn1) out.push_back(bn1.get());
    out.push_back(relu1.get());
    out.push_back(conv2.get());
    if (bn2) out.push_back(bn2.get());
    out.push_back(relu2.get());
}

UNet::UNet(const UNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.base_channels < 1) throw InvalidArgument("unet: base_channels must be >= 1");
    if (cfg.depth != 3) throw InvalidArgument("unet: depth is fixed at 3");
    if (cfg.input_size <= 0 || cfg.input_size % (1 << cfg.depth) != 0) {
        throw InvalidArgument("unet: input_size must be a positive multiple of 8");
    }
    if (cfg.mask_threshold <= 0.f || cfg.mask_threshold >= 1.f) {
        throw InvalidArgument("unet: mask_threshold must be in (0, 1)");
    }

    int in_ch = 1;
    for (int level = 0; level < cfg.depth; ++level) {
        const int ch = cfg.base_channels << level;
        enc_.emplace_back(in_ch, ch, cfg.with_batchnorm, rng);
        pool_.push_back(std::make_unique<MaxPool2>());
        in_ch = ch;
    }
    const int bottleneck_ch = cfg.base_channels << cfg.depth;
    bottleneck_ = ConvBlock(in_ch, bottleneck_ch, cfg.with_batchnorm, rng);

    int up_ch = bottleneck_ch;
    for (int level = cfg.depth - 1; level >= 0; --level) {
        const int ch = cfg.base_channels << level;
        up_.push_back(std::make_unique<UpSample2>());
        cat_.push_back(std::make_unique<Concat>());
        dec_.emplace_back(up_ch + ch, ch, cfg.with_batchnorm, rng);
        up_ch = ch;
    }
    head_ = std::make_unique<Conv3x3Same>(cfg.base_channels, 1, rng);
    head_sigmoid_ = std::make_unique<Sigmoid>();
}

Tensor UNet::forward(const Tensor& x, Mode mode, Rng& rng) {
    if (x.ndim() != 4 || x.dim(1) != 1) throw ShapeError("unet: expected [N,1,H,W] input");

    std::vector<Tensor> skips(enc_.size());
    Tensor t = x;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        t = enc_[i].forward(t, mode, rng);
        skips[i] = t;
        t = pool_[i]->forward(t, mode, rng);
    }
    t = bottleneck_.forward(t, mode, rng);
    for (std::size_t d = 0; d < dec_.size(); ++d) {
        const std::size_t level = enc_.size() - 1 - d;
        t = up_[d]->forward(t, mode, rng);
        t = cat_[d]->forward2(skips[level], t, mode);
        t = dec_[d].forward(t, mode, rng);
    }
    t = head_->forward(t, mode, rng);
    return head_sigmoid_->forward(t, mode, rng);
}

Tensor UNet::backward(const Tensor& dy) {
    Tensor g = head_sigmoid_->backward(dy);
    g = head_->backward(g);

    std::vector<Tensor> skip_grads(enc_.size());
    // Decoder was applied d = 0..D-1 in forward; undo in reverse.
    for (std::size_t d = dec_.size(); d-- > 0;) {
        const std::size_t level = enc_.size() - 1 - d;
        g = dec_[d].backward(g);
        auto [skip_g, up_g] = cat_[d]->backward2(g);
        skip_grads[level] = std::move(skip_g);
        g = up_[d]->backward(up_g);
    }
    g = bottleneck_.backward(g);
    for (std::size_t i = enc_.size(); i-- > 0;) {
        g = pool_[i]->backward(g);
        for (std::size_t j = 0; j < g.numel(); ++j) g.data[j] += skip_grads[i].data[j];
        g = enc_[i].backward(g);
    }
    return g;
}

std::vector<Layer*> UNet::layers() {
    std::vector<Layer*> out;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        enc_[i].collect(out);
        out.push_back(pool_[i].get());
    }
    bottleneck_.collect(out);
    for (std::size_t d = 0; d < dec_.size(); ++d) {
        out.push_back(up_[d].get());
        out.push_back(cat_[d].get());
        dec_[d].collect(out);
    }
    out.push_back(head_.get());
    out.push_back(head_sigmoid_.get());
    return out;
}

std::unique_ptr<UNet> build_unet(const UNetConfig& cfg, std::uint64_t init_seed) {
    Rng rng(init_seed);
    return std::make_unique<UNet>(cfg, rng);
}

Tensor tensor_from_norm(const NormImage& img) {
    Tensor t({1, 1, img.height, img.width});
    t.data.assign(img.values.begin(), img.values.end());
    return t;
}

Tensor tensor_from_image(const Image& img) {
    Tensor t({1, 1, img.height, img.width});
    for (std::size_t i = 0; i < img.pixels.size(); ++i) t.data[i] = img.pixels[i];
    return t;
}

Tensor tensor_from_mask(const Mask& m) {
    Tensor t({1, 1, m.height, m.width});
    for (std::size_t i = 0; i < m.bits.size(); ++i) t.data[i] = m.bits[i] ? 1.f : 0.f;
    return t;
}

namespace {

class PairSource : public BatchSource {
public:
    PairSource(const std::vector<std::pair<NormImage, Mask>>& pairs, int size)
        : pairs_(pairs), size_(size) {}

    std::size_t size() const override { return pairs_.size(); }

    void fill(std::span<const std::size_t> indices, Rng&, Tensor& x, Tensor& y) override {
        const int b = static_cast<int>(indices.size());
        x = Tensor({b, 1, size_, size_});
        y = Tensor({b, 1, size_, size_});
        const std::size_t plane = static_cast<std::size_t>(size_) * size_;
        for (int i = 0; i < b; ++i) {
            const auto& [img, mask] = pairs_[indices[i]];
            for (std::size_t j = 0; j < plane; ++j) {
                x.data[i * plane + j] = img.values[j];
                y.data[i * plane + j] = mask.bits[j] ? 1.f : 0.f;
            }
        }
    }

private:
    const std::vector<std::pair<NormImage, Mask>>& pairs_;
    int size_;
};

}  // namespace

std::vector<LossRecord> train_unet(UNet& model,
                                   const std::vector<std::pair<NormImage, Mask>>& pairs,
                                   const TrainConfig& cfg) {
    const int s = model.config().input_size;
    for (const auto& [img, mask] : pairs) {
        if (img.width != s || img.height != s || mask.width != s || mask.height != s) {
            throw InvalidArgument("train_unet: pair dimensions do not match input_size");
        }
    }
    PairSource source(pairs, s);
    return train(model, source, cfg);
}

Mask predict_mask(UNet& model, const NormImage& img) {
    const int s = model.config().input_size;
    if (img.width != s || img.height != s) {
        throw InvalidArgument("predict_mask: image does not match input_size");
    }
    const Tensor out = model.infer(tensor_from_norm(img));
    Mask m(img.width, img.height);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.bits[i] = out.data[i] > model.config().mask_threshold;
    }
    return m;
}

}  // namespace ctpipe
