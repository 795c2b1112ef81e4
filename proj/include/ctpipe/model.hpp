#ifndef CTPIPE_MODEL_HPP_
#define CTPIPE_MODEL_HPP_

#include <filesystem>
#include <memory>
#include <vector>

#include "ctpipe/layers.hpp"

namespace ctpipe {

// A trainable network: an ordered set of layers plus a forward/backward
// wiring over them (sequential or not).
class Model {
public:
    virtual ~Model() = default;

    virtual Tensor forward(const Tensor& x, Mode mode, Rng& rng) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;

    // Layers in a stable order, including parameterless nodes.
    virtual std::vector<Layer*> layers() = 0;

    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    void zero_grads();
    std::size_t param_count();

    // Convenience eval-mode forward with a throwaway rng.
    Tensor infer(const Tensor& x);
};

class Sequential : public Model {
public:
    Sequential() = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Layer*> layers() override;

    Layer& layer(std::size_t i) { return *layers_[i]; }
    std::size_t size() const { return layers_.size(); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Versioned binary weight file: magic "CTPW", format version, layer count,
// then per layer a kind tag plus each state tensor's shape and raw
// little-endian float32 data. Load verifies the structure against the
// model: FormatError for magic/version/truncation problems, ShapeError when
// the file disagrees with the model's layers.
void save_weights(Model& model, const std::filesystem::path& path);
void load_weights(Model& model, const std::filesystem::path& path);

}  // namespace ctpipe

#endif
