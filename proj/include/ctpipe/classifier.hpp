#ifndef CTPIPE_CLASSIFIER_HPP_
#define CTPIPE_CLASSIFIER_HPP_

#include <memory>
#include <vector>

#include "ctpipe/image.hpp"
#include "ctpipe/model.hpp"
#include "ctpipe/train.hpp"

namespace ctpipe {

struct ClfConfig {
    std::vector<int> conv_channels = {16, 32, 64, 128};  // {16,...,256} for the 5L variant
    int dense_units = 256;
    float dropout = 0.10f;
    int input_size = 224;
    int batch_size = 128;
    float initial_lr = 0.1f;
    int epochs = 20;
    std::uint64_t rng_seed = 0;
};

// Slice classifier: per conv stage Conv3x3Same -> BatchNorm -> ReLU ->
// MaxPool2, then Flatten -> Dense(dense_units) -> BatchNorm -> ReLU ->
// Dropout -> Dense(1) -> Sigmoid. The output is P(Non-COVID).
std::unique_ptr<Sequential> build_classifier(const ClfConfig& cfg, std::uint64_t init_seed = 0);

// Flip helpers; augment() draws each flip independently with probability
// 0.5.
Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);
Image augment_with(const Image& img, bool hflip, bool vflip);
Image augment(const Image& img, Rng& rng);

struct LabeledSlice {
    Image image;
    bool non_covid;  // target convention: 1 = Non-COVID
};

// BCE + Adam training with per-sample flip augmentation re-drawn every
// epoch.
std::vector<LossRecord> train_classifier(Sequential& model, const std::vector<LabeledSlice>& data,
                                         const ClfConfig& cfg);

// Expected square input size, recovered from the model structure.
int classifier_input_size(Sequential& model);

// Eval-mode P(Non-COVID) for one extracted slice.
float predict_slice(Sequential& model, const Image& img);

}  // namespace ctpipe

#endif
