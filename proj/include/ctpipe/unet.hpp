#ifndef CTPIPE_UNET_HPP_
#define CTPIPE_UNET_HPP_

#include <memory>
#include <utility>
#include <vector>

#include "ctpipe/image.hpp"
#include "ctpipe/model.hpp"
#include "ctpipe/train.hpp"

namespace ctpipe {

struct UNetConfig {
    int base_channels = 16;
    int depth = 3;
    bool with_batchnorm = true;
    int input_size = 224;  // square, divisible by 2^depth
    float mask_threshold = 0.5f;
};

// Encoder/decoder segmenter with skip connections. Three levels, two
// 3x3 convolutions per level (BatchNorm optional), 2x2 max pooling down,
// nearest-neighbour upsampling + channel concat up, 1-channel conv +
// sigmoid head. Channels double per level from base_channels.
class UNet : public Model {
public:
    UNet(const UNetConfig& cfg, Rng& rng);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Layer*> layers() override;

    const UNetConfig& config() const { return cfg_; }

private:
    // Two conv(+bn)+relu stages.
    struct ConvBlock {
        std::unique_ptr<Conv3x3Same> conv1, conv2;
        std::unique_ptr<BatchNorm> bn1, bn2;
        std::unique_ptr<ReLU> relu1, relu2;

        ConvBlock() = default;
        ConvBlock(int in_ch, int out_ch, bool with_bn, Rng& rng);
        Tensor forward(const Tensor& x, Mode mode, Rng& rng);
        Tensor backward(const Tensor& dy);
        void collect(std::vector<Layer*>& out);
    };

    UNetConfig cfg_;
    std::vector<ConvBlock> enc_;
    std::vector<std::unique_ptr<MaxPool2>> pool_;
    ConvBlock bottleneck_;
    std::vector<std::unique_ptr<UpSample2>> up_;
    std::vector<std::unique_ptr<Concat>> cat_;
    std::vector<ConvBlock> dec_;
    std::unique_ptr<Conv3x3Same> head_;
    std::unique_ptr<Sigmoid> head_sigmoid_;
};

std::unique_ptr<UNet> build_unet(const UNetConfig& cfg, std::uint64_t init_seed = 0);

// Image <-> tensor bridges shared by the networks.
Tensor tensor_from_norm(const NormImage& img);
Tensor tensor_from_image(const Image& img);
Tensor tensor_from_mask(const Mask& m);

// BCE + Adam training on (image, mask) pairs under the exponential
// schedule; returns the per-step loss log.
std::vector<LossRecord> train_unet(UNet& model,
                                   const std::vector<std::pair<NormImage, Mask>>& pairs,
                                   const TrainConfig& cfg);

// Eval-mode forward; mask = sigmoid map > cfg.mask_threshold.
Mask predict_mask(UNet& model, const NormImage& img);

}  // namespace ctpipe

#endif
