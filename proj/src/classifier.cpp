#include "ctpipe/classifier.hpp"

#include "ctpipe/unet.hpp"

namespace ctpipe {

std::unique_ptr<Sequential> build_classifier(const ClfConfig& cfg, std::uint64_t init_seed) {
    if (cfg.conv_channels.empty()) throw InvalidArgument("classifier: no conv layers");
    for (std::size_t i = 1; i < cfg.conv_channels.size(); ++i) {
        if (cfg.conv_channels[i] <= cfg.conv_channels[i - 1]) {
            throw InvalidArgument("classifier: conv_channels must be ascending");
        }
    }
    const int levels = static_cast<int>(cfg.conv_channels.size());
    if (cfg.input_size <= 0 || cfg.input_size % (1 << levels) != 0) {
        throw InvalidArgument("classifier: input_size must be divisible by 2^layers");
    }
    if (cfg.dropout < 0.f || cfg.dropout >= 1.f) {
        throw InvalidArgument("classifier: dropout must be in [0, 1)");
    }

    Rng rng(init_seed);
    auto model = std::make_unique<Sequential>();
    int in_ch = 1;
    for (int ch : cfg.conv_channels) {
        model->add(std::make_unique<Conv3x3Same>(in_ch, ch, rng));
        model->add(std::make_unique<BatchNorm>(ch));
        model->add(std::make_unique<ReLU>());
        model->add(std::make_unique<MaxPool2>());
        in_ch = ch;
    }
    const int spatial = cfg.input_size >> levels;
    const int features = in_ch * spatial * spatial;
    model->add(std::make_unique<Flatten>());
    model->add(std::make_unique<Dense>(features, cfg.dense_units, rng));
    model->add(std::make_unique<BatchNorm>(cfg.dense_units));
    model->add(std::make_unique<ReLU>());
    model->add(std::make_unique<Dropout>(cfg.dropout));
    model->add(std::make_unique<Dense>(cfg.dense_units, 1, rng));
    model->add(std::make_unique<Sigmoid>());
    return model;
}

Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
    }
    return out;
}

Image flip_vertical(const Image& img) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(x, img.height - 1 - y);
    }
    return out;
}

Image augment_with(const Image& img, bool hflip, bool vflip) {
    Image out = img;
    if (hflip) out = flip_horizontal(out);
    if (vflip) out = flip_vertical(out);
    return out;
}

Image augment(const Image& img, Rng& rng) {
    const bool h = rng.bernoulli(0.5);
    const bool v = rng.bernoulli(0.5);
    return augment_with(img, h, v);
}

namespace {

class SliceSource : public BatchSource {
public:
    SliceSource(const std::vector<LabeledSlice>& data, int size) : data_(data), size_(size) {}

    std::size_t size() const override { return data_.size(); }

    void fill(std::span<const std::size_t> indices, Rng& rng, Tensor& x, Tensor& y) override {
        const int b = static_cast<int>(indices.size());
        x = Tensor({b, 1, size_, size_});
        y = Tensor({b, 1});
        const std::size_t plane = static_cast<std::size_t>(size_) * size_;
        for (int i = 0; i < b; ++i) {
            const LabeledSlice& s = data_[indices[i]];
            const Image aug = augment(s.image, rng);
            for (std::size_t j = 0; j < plane; ++j) x.data[i * plane + j] = aug.pixels[j];
            y.data[i] = s.non_covid ? 1.f : 0.f;
        }
    }

private:
    const std::vector<LabeledSlice>& data_;
    int size_;
};

}  // namespace

std::vector<LossRecord> train_classifier(Sequential& model, const std::vector<LabeledSlice>& data,
                                         const ClfConfig& cfg) {
    for (const auto& s : data) {
        if (s.image.width != cfg.input_size || s.image.height != cfg.input_size) {
            throw InvalidArgument("train_classifier: slice does not match input_size");
        }
    }
    TrainConfig tc;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.initial_lr = cfg.initial_lr;
    tc.rng_seed = cfg.rng_seed;
    SliceSource source(data, cfg.input_size);
    return train(model, source, tc);
}

int classifier_input_size(Sequential& model) {
    int pools = 0;
    int last_conv_ch = 0;
    int dense_features = 0;
    for (Layer* l : model.layers()) {
        if (l->kind() == LayerKind::MaxPool2) ++pools;
        if (l->kind() == LayerKind::Conv3x3Same) last_conv_ch = l->spec().params[1];
        if (l->kind() == LayerKind::Dense && dense_features == 0) {
            dense_features = l->spec().params[0];
        }
    }
    if (last_conv_ch == 0 || dense_features == 0) {
        throw ShapeError("classifier_input_size: not a conv classifier");
    }
    const int spatial_sq = dense_features / last_conv_ch;
    int spatial = 0;
    while ((spatial + 1) * (spatial + 1) <= spatial_sq) ++spatial;
    return spatial << pools;
}

float predict_slice(Sequential& model, const Image& img) {
    const int expect = classifier_input_size(model);
    if (img.width != expect || img.height != expect) {
        throw InvalidArgument("predict_slice: slice is " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + ", model expects " +
                              std::to_string(expect));
    }
    const Tensor out = model.infer(tensor_from_image(img));
    if (out.numel() != 1) throw ShapeError("predict_slice: expected scalar output");
    return out.data[0];
}

}  // namespace ctpipe
