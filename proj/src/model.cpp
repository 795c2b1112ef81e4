#include "ctpipe/model.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace ctpipe {

std::vector<Tensor*> Model::params() {
    std::vector<Tensor*> out;
    for (Layer* l : layers()) {
        for (Tensor* p : l->params()) out.push_back(p);
    }
    return out;
}

std::vector<Tensor*> Model::grads() {
    std::vector<Tensor*> out;
    for (Layer* l : layers()) {
        for (Tensor* g : l->grads()) out.push_back(g);
    }
    return out;
}

void Model::zero_grads() {
    for (Layer* l : layers()) l->zero_grads();
}

std::size_t Model::param_count() {
    std::size_t n = 0;
    for (Tensor* p : params()) n += p->numel();
    return n;
}

Tensor Model::infer(const Tensor& x) {
    Rng rng(0);
    return forward(x, Mode::Eval, rng);
}

Tensor Sequential::forward(const Tensor& x, Mode mode, Rng& rng) {
    Tensor t = x;
    for (auto& l : layers_) t = l->forward(t, mode, rng);
    return t;
}

Tensor Sequential::backward(const Tensor& dy) {
    Tensor g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Layer*> Sequential::layers() {
    std::vector<Layer*> out;
    out.reserve(layers_.size());
    for (auto& l : layers_) out.push_back(l.get());
    return out;
}

namespace {

constexpr char kMagic[4] = {'C', 'T', 'P', 'W'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    // Written explicitly little-endian so files are portable.
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("weights: truncated file");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void write_f32(std::ostream& out, const float* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t v;
        std::memcpy(&v, &data[i], 4);
        write_u32(out, v);
    }
}

void read_f32(std::istream& in, float* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t v = read_u32(in);
        std::memcpy(&data[i], &v, 4);
    }
}

}  // namespace

void save_weights(Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("weights: cannot open for write: " + path.string());

    const auto layers = model.layers();
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(layers.size()));
    for (Layer* l : layers) {
        write_u32(out, static_cast<std::uint32_t>(l->kind()));
        const auto state = l->state();
        write_u32(out, static_cast<std::uint32_t>(state.size()));
        for (Tensor* t : state) {
            write_u32(out, static_cast<std::uint32_t>(t->shape.size()));
            for (int d : t->shape) write_u32(out, static_cast<std::uint32_t>(d));
            write_f32(out, t->data.data(), t->numel());
        }
    }
    out.flush();
    if (!out) throw IoError("weights: write failed: " + path.string());
}

void load_weights(Model& model, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("weights: cannot open: " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("weights: bad magic in " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw FormatError("weights: unsupported version " + std::to_string(version));
    }

    const auto layers = model.layers();
    const std::uint32_t layer_count = read_u32(in);
    if (layer_count != layers.size()) {
        throw ShapeError("weights: file has " + std::to_string(layer_count) + " layers, model has " +
                         std::to_string(layers.size()));
    }
    for (Layer* l : layers) {
        const std::uint32_t kind = read_u32(in);
        if (kind != static_cast<std::uint32_t>(l->kind())) {
            throw ShapeError("weights: layer kind mismatch");
        }
        const auto state = l->state();
        const std::uint32_t tensor_count = read_u32(in);
        if (tensor_count != state.size()) throw ShapeError("weights: tensor count mismatch");
        for (Tensor* t : state) {
            const std::uint32_t ndim = read_u32(in);
            if (ndim != t->shape.size()) throw ShapeError("weights: rank mismatch");
            for (int d : t->shape) {
                if (read_u32(in) != static_cast<std::uint32_t>(d)) {
                    throw ShapeError("weights: dimension mismatch");
                }
            }
            read_f32(in, t->data.data(), t->numel());
        }
    }
}

}  // namespace ctpipe
