#include "ctpipe/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace ctpipe {

float lr_at_epoch(const TrainConfig& cfg, int epoch) {
    return cfg.initial_lr * std::exp(static_cast<float>(-epoch));
}

int steps_per_epoch(int set_size, int batch_size) {
    if (set_size <= 0 || batch_size <= 0) {
        throw InvalidArgument("steps_per_epoch: counts must be positive");
    }
    return (set_size + batch_size - 1) / batch_size;
}

std::vector<LossRecord> train(Model& model, BatchSource& data, const TrainConfig& cfg) {
    if (cfg.batch_size <= 0 || cfg.epochs < 0 || cfg.initial_lr <= 0.f) {
        throw InvalidArgument("train: bad config");
    }
    const std::size_t n = cfg.train_set_size > 0 ? static_cast<std::size_t>(cfg.train_set_size)
                                                 : data.size();
    if (n == 0 || n > data.size()) throw InvalidArgument("train: set size out of range");

    AdamState adam(model.params());
    Rng rng(cfg.rng_seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<LossRecord> log;
    const int steps = steps_per_epoch(static_cast<int>(n), cfg.batch_size);
    Tensor x, y;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        const float lr = lr_at_epoch(cfg, epoch);
        for (int step = 0; step < steps; ++step) {
            const std::size_t lo = static_cast<std::size_t>(step) * cfg.batch_size;
            const std::size_t hi = std::min(n, lo + cfg.batch_size);
            data.fill(std::span<const std::size_t>(order.data() + lo, hi - lo), rng, x, y);

            model.zero_grads();
            const Tensor pred = model.forward(x, Mode::Train, rng);
            const float loss = bce_loss(pred, y);
            if (!std::isfinite(loss)) {
                throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            model.backward(bce_loss_backward(pred, y));
            adam_step(model.params(), model.grads(), adam, lr);
            log.push_back({epoch, step, lr, loss});
        }
    }
    return log;
}

void write_loss_log(const std::vector<LossRecord>& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("loss log: cannot open " + path.string());
    out << "epoch,step,lr,loss\n";
    for (const auto& r : log) {
        out << r.epoch << ',' << r.step << ',' << r.lr << ',' << r.loss << '\n';
    }
}

namespace {

// Loss with a double-precision reduction; per-activation arithmetic stays
// float32, but the final sum must not re-round or the finite differences
// drown in it.
double bce_loss_double(const Tensor& pred, const Tensor& target) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double p = std::min(std::max(double(pred.data[i]), 1e-7), 1.0 - 1e-7);
        const double t = target.data[i];
        sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return sum / double(pred.numel());
}

}  // namespace

double gradient_check(Model& model, const Tensor& input, const Tensor& target, float h,
                      std::size_t max_coords, std::uint64_t seed) {
    // Fresh rng with the same seed before every forward keeps dropout
    // patterns identical across the analytic and perturbed evaluations.
    auto loss_at = [&]() {
        Rng rng(seed);
        return bce_loss_double(model.forward(input, Mode::Train, rng), target);
    };

    model.zero_grads();
    {
        Rng rng(seed);
        const Tensor pred = model.forward(input, Mode::Train, rng);
        model.backward(bce_loss_backward(pred, target));
    }

    const auto params = model.params();
    const auto grads = model.grads();
    double max_rel = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        const Tensor& g = *grads[t];
        const std::size_t n = p.numel();
        const std::size_t stride = std::max<std::size_t>(1, n / std::max<std::size_t>(1, max_coords));
        for (std::size_t j = 0; j < n; j += stride) {
            const float saved = p.data[j];
            p.data[j] = saved + h;
            const double lp = loss_at();
            p.data[j] = saved - h;
            const double lm = loss_at();
            p.data[j] = saved;

            const double fd = (lp - lm) / (2.0 * double(h));
            const double an = g.data[j];
            const double denom = std::max(std::abs(an), std::abs(fd));
            if (denom < 1e-5) continue;  // below finite-difference noise
            max_rel = std::max(max_rel, std::abs(an - fd) / denom);
        }
    }
    return max_rel;
}

}  // namespace ctpipe
