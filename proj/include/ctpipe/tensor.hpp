#ifndef CTPIPE_TENSOR_HPP_
#define CTPIPE_TENSOR_HPP_

#include <cstddef>
#include <vector>

#include "ctpipe/errors.hpp"

namespace ctpipe {

// N-dimensional 32-bit-float container, row-major.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), 0.f) {}
    Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape)) throw ShapeError("tensor data does not match shape");
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("tensor dimensions must be positive");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    // NCHW accessors.
    float& at4(int n, int c, int h, int w) {
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    const float& at4(int n, int c, int h, int w) const {
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    float& at2(int n, int f) { return data[static_cast<std::size_t>(n) * shape[1] + f]; }
    const float& at2(int n, int f) const { return data[static_cast<std::size_t>(n) * shape[1] + f]; }

    void fill(float v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace ctpipe

#endif
