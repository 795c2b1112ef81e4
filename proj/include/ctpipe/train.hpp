#ifndef CTPIPE_TRAIN_HPP_
#define CTPIPE_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ctpipe/model.hpp"
#include "ctpipe/optim.hpp"

namespace ctpipe {

struct TrainConfig {
    int batch_size = 32;
    int epochs = 20;
    float initial_lr = 0.1f;
    int train_set_size = 0;  // 0: taken from the batch source
    int test_set_size = 0;
    std::uint64_t rng_seed = 0;
};

// Exponential schedule: initial_lr * e^(-epoch).
float lr_at_epoch(const TrainConfig& cfg, int epoch);

// ceil(set_size / batch_size): every sample is seen each epoch.
int steps_per_epoch(int set_size, int batch_size);

// Supplies training batches. fill() receives the (already shuffled) sample
// indices for one batch and must produce the input and target tensors;
// per-sample augmentation draws from the given rng.
class BatchSource {
public:
    virtual ~BatchSource() = default;
    virtual std::size_t size() const = 0;
    virtual void fill(std::span<const std::size_t> indices, Rng& rng, Tensor& x, Tensor& y) = 0;
};

struct LossRecord {
    int epoch;
    int step;
    float lr;
    float loss;
};

// Adam + BCE training loop over the schedule above. Sample order is
// reshuffled each epoch from cfg.rng_seed, so two runs with the same seed
// and data produce bit-identical loss histories. Throws DivergenceError on
// a non-finite loss.
std::vector<LossRecord> train(Model& model, BatchSource& data, const TrainConfig& cfg);

// Loss log as CSV: epoch,step,lr,loss.
void write_loss_log(const std::vector<LossRecord>& log, const std::filesystem::path& path);

// Central finite differences (default h = 1e-3) against the analytic
// gradients of BCE(model(input), target); returns the max relative error
// over up to max_coords sampled coordinates per parameter tensor.
// Coordinates where both gradients are below noise level are skipped.
double gradient_check(Model& model, const Tensor& input, const Tensor& target,
                      float h = 1e-3f, std::size_t max_coords = 400,
                      std::uint64_t seed = 1234);

}  // namespace ctpipe

#endif
