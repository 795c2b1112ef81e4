#include "ctpipe/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctpipe {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv3x3Same: return "conv3x3same";
        case LayerKind::BatchNorm: return "batchnorm";
        case LayerKind::ReLU: return "relu";
        case LayerKind::MaxPool2: return "maxpool2";
        case LayerKind::Dense: return "dense";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Sigmoid: return "sigmoid";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::UpSample2: return "upsample2";
        case LayerKind::Concat: return "concat";
    }
    return "?";
}

namespace {

void he_uniform(Tensor& t, int fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (float& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
}

void require_4d(const Tensor& x, const char* who) {
    if (x.ndim() != 4) throw ShapeError(std::string(who) + ": expected NCHW input");
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv3x3Same

Conv3x3Same::Conv3x3Same(int in_channels, int out_channels, Rng& rng)
    : weights_({out_channels, in_channels, 3, 3}),
      bias_({out_channels}),
      dweights_({out_channels, in_channels, 3, 3}),
      dbias_({out_channels}),
      in_channels_(in_channels),
      out_channels_(out_channels) {
    he_uniform(weights_, in_channels * 9, rng);
}

Tensor Conv3x3Same::forward(const Tensor& x, Mode mode, Rng&) {
    require_4d(x, "conv3x3same");
    if (x.dim(1) != in_channels_) throw ShapeError("conv3x3same: channel mismatch");
    const int N = x.dim(0), C = in_channels_, H = x.dim(2), W = x.dim(3), K = out_channels_;

    // Eval-mode forwards write no layer state, so a finished model can be
    // shared across inference threads.
    if (mode == Mode::Train) cached_input_ = x;
    Tensor out({N, K, H, W});
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            float* out_plane = &out.at4(n, k, 0, 0);
            const float b = bias_.data[k];
            for (int i = 0; i < H * W; ++i) out_plane[i] = b;
            for (int c = 0; c < C; ++c) {
                const float* in_plane = &x.at4(n, c, 0, 0);
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const float wv = weights_.at4(k, c, ky, kx);
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(W, W + 1 - kx);
                        for (int y = 0; y < H; ++y) {
                            const int iy = y + ky - 1;
                            if (iy < 0 || iy >= H) continue;
                            float* orow = out_plane + static_cast<std::size_t>(y) * W;
                            const float* irow =
                                in_plane + static_cast<std::size_t>(iy) * W + (kx - 1);
                            for (int px = x_lo; px < x_hi; ++px) orow[px] += wv * irow[px];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor Conv3x3Same::backward(const Tensor& dy) {
    const Tensor& x = cached_input_;
    const int N = x.dim(0), C = in_channels_, H = x.dim(2), W = x.dim(3), K = out_channels_;
    if (dy.shape != std::vector<int>{N, K, H, W}) throw ShapeError("conv3x3same: bad grad shape");

    Tensor dx({N, C, H, W});
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            const float* dy_plane = &dy.at4(n, k, 0, 0);
            float db = 0.f;
            for (int i = 0; i < H * W; ++i) db += dy_plane[i];
            dbias_.data[k] += db;

            for (int c = 0; c < C; ++c) {
                const float* in_plane = &x.at4(n, c, 0, 0);
                float* dx_plane = &dx.at4(n, c, 0, 0);
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const float wv = weights_.at4(k, c, ky, kx);
                        float dw = 0.f;
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(W, W + 1 - kx);
                        for (int y = 0; y < H; ++y) {
                            const int iy = y + ky - 1;
                            if (iy < 0 || iy >= H) continue;
                            const float* dyrow = dy_plane + static_cast<std::size_t>(y) * W;
                            const float* irow =
                                in_plane + static_cast<std::size_t>(iy) * W + (kx - 1);
                            float* dxrow = dx_plane + static_cast<std::size_t>(iy) * W + (kx - 1);
                            for (int px = x_lo; px < x_hi; ++px) {
                                dw += dyrow[px] * irow[px];
                                dxrow[px] += wv * dyrow[px];
                            }
                        }
                        dweights_.at4(k, c, ky, kx) += dw;
                    }
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(int channels, float epsilon, float momentum)
    : gamma_({channels}),
      beta_({channels}),
      running_mean_({channels}),
      running_var_({channels}),
      dgamma_({channels}),
      dbeta_({channels}),
      channels_(channels),
      epsilon_(epsilon),
      momentum_(momentum) {
    gamma_.fill(1.f);
    running_var_.fill(1.f);
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode, Rng&) {
    const bool is4d = x.ndim() == 4;
    if (!is4d && x.ndim() != 2) throw ShapeError("batchnorm: expected 2-d or 4-d input");
    if (x.dim(1) != channels_) throw ShapeError("batchnorm: channel mismatch");
    const int N = x.dim(0);
    const int HW = is4d ? x.dim(2) * x.dim(3) : 1;
    per_channel_count_ = static_cast<std::size_t>(N) * HW;

    Tensor out(x.shape);
    if (mode == Mode::Train) {
        batch_mean_.assign(channels_, 0.f);
        batch_invstd_.assign(channels_, 0.f);
        cached_xhat_ = Tensor(x.shape);
        for (int c = 0; c < channels_; ++c) {
            double sum = 0.0, sq = 0.0;
            for (int n = 0; n < N; ++n) {
                const float* p = &x.data[(static_cast<std::size_t>(n) * channels_ + c) * HW];
                for (int i = 0; i < HW; ++i) {
                    sum += p[i];
                    sq += double(p[i]) * p[i];
                }
            }
            const double m = sum / double(per_channel_count_);
            const double var = std::max(0.0, sq / double(per_channel_count_) - m * m);
            const float invstd = static_cast<float>(1.0 / std::sqrt(var + epsilon_));
            batch_mean_[c] = static_cast<float>(m);
            batch_invstd_[c] = invstd;
            running_mean_.data[c] =
                momentum_ * running_mean_.data[c] + (1.f - momentum_) * static_cast<float>(m);
            running_var_.data[c] =
                momentum_ * running_var_.data[c] + (1.f - momentum_) * static_cast<float>(var);

            const float g = gamma_.data[c], b = beta_.data[c], mf = static_cast<float>(m);
            for (int n = 0; n < N; ++n) {
                const std::size_t base = (static_cast<std::size_t>(n) * channels_ + c) * HW;
                for (int i = 0; i < HW; ++i) {
                    const float xh = (x.data[base + i] - mf) * invstd;
                    cached_xhat_.data[base + i] = xh;
                    out.data[base + i] = g * xh + b;
                }
            }
        }
        trained_forward_ = true;
    } else {
        for (int c = 0; c < channels_; ++c) {
            const float invstd = 1.f / std::sqrt(running_var_.data[c] + epsilon_);
            const float m = running_mean_.data[c];
            const float g = gamma_.data[c], b = beta_.data[c];
            for (int n = 0; n < N; ++n) {
                const std::size_t base = (static_cast<std::size_t>(n) * channels_ + c) * HW;
                for (int i = 0; i < HW; ++i) {
                    out.data[base + i] = g * (x.data[base + i] - m) * invstd + b;
                }
            }
        }
    }
    return out;
}

Tensor BatchNorm::backward(const Tensor& dy) {
    if (!trained_forward_) throw Error("batchnorm: backward requires a train-mode forward");
    const int N = dy.dim(0);
    const int HW = dy.ndim() == 4 ? dy.dim(2) * dy.dim(3) : 1;
    const float M = static_cast<float>(per_channel_count_);

    Tensor dx(dy.shape);
    for (int c = 0; c < channels_; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < N; ++n) {
            const std::size_t base = (static_cast<std::size_t>(n) * channels_ + c) * HW;
            for (int i = 0; i < HW; ++i) {
                sum_dy += dy.data[base + i];
                sum_dy_xhat += double(dy.data[base + i]) * cached_xhat_.data[base + i];
            }
        }
        dbeta_.data[c] += static_cast<float>(sum_dy);
        dgamma_.data[c] += static_cast<float>(sum_dy_xhat);

        const float g = gamma_.data[c];
        const float invstd = batch_invstd_[c];
        const float s_dy = static_cast<float>(sum_dy);
        const float s_dyx = static_cast<float>(sum_dy_xhat);
        for (int n = 0; n < N; ++n) {
            const std::size_t base = (static_cast<std::size_t>(n) * channels_ + c) * HW;
            for (int i = 0; i < HW; ++i) {
                const float xh = cached_xhat_.data[base + i];
                dx.data[base + i] =
                    g * invstd / M * (M * dy.data[base + i] - s_dy - xh * s_dyx);
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Activations

Tensor ReLU::forward(const Tensor& x, Mode mode, Rng&) {
    if (mode == Mode::Train) cached_input_ = x;
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] > 0.f ? x.data[i] : 0.f;
    return out;
}

Tensor ReLU::backward(const Tensor& dy) {
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.numel(); ++i) {
        dx.data[i] = cached_input_.data[i] > 0.f ? dy.data[i] : 0.f;
    }
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x, Mode mode, Rng&) {
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        out.data[i] = 1.f / (1.f + std::exp(-x.data[i]));
    }
    if (mode == Mode::Train) cached_output_ = out;
    return out;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.numel(); ++i) {
        const float s = cached_output_.data[i];
        dx.data[i] = dy.data[i] * s * (1.f - s);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2

Tensor MaxPool2::forward(const Tensor& x, Mode mode, Rng&) {
    require_4d(x, "maxpool2");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int OH = (H + 1) / 2, OW = (W + 1) / 2;
    const bool track = mode == Mode::Train;
    if (track) {
        in_shape_ = x.shape;
        argmax_.assign(static_cast<std::size_t>(N) * C * OH * OW, 0);
    }

    Tensor out({N, C, OH, OW});
    std::size_t o = 0;
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            for (int oy = 0; oy < OH; ++oy) {
                for (int ox = 0; ox < OW; ++ox, ++o) {
                    float best = -std::numeric_limits<float>::infinity();
                    std::size_t best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy) {
                        const int iy = 2 * oy + dy;
                        if (iy >= H) continue;
                        for (int dx = 0; dx < 2; ++dx) {
                            const int ix = 2 * ox + dx;
                            if (ix >= W) continue;
                            const std::size_t idx =
                                ((static_cast<std::size_t>(n) * C + c) * H + iy) * W + ix;
                            if (x.data[idx] > best) {  // strict: first max wins ties
                                best = x.data[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out.data[o] = best;
                    if (track) argmax_[o] = best_idx;
                }
            }
        }
    }
    return out;
}

Tensor MaxPool2::backward(const Tensor& dy) {
    Tensor dx(in_shape_);
    for (std::size_t o = 0; o < dy.numel(); ++o) dx.data[argmax_[o]] += dy.data[o];
    return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(int in_features, int units, Rng& rng)
    : weights_({in_features, units}),
      bias_({units}),
      dweights_({in_features, units}),
      dbias_({units}),
      in_features_(in_features),
      units_(units) {
    he_uniform(weights_, in_features, rng);
}

Tensor Dense::forward(const Tensor& x, Mode mode, Rng&) {
    if (x.ndim() != 2 || x.dim(1) != in_features_) throw ShapeError("dense: bad input shape");
    const int N = x.dim(0);
    if (mode == Mode::Train) cached_input_ = x;

    Tensor out({N, units_});
    for (int n = 0; n < N; ++n) {
        float* orow = &out.at2(n, 0);
        for (int u = 0; u < units_; ++u) orow[u] = bias_.data[u];
        const float* irow = &x.at2(n, 0);
        for (int f = 0; f < in_features_; ++f) {
            const float xv = irow[f];
            const float* wrow = &weights_.at2(f, 0);
            for (int u = 0; u < units_; ++u) orow[u] += xv * wrow[u];
        }
    }
    return out;
}

Tensor Dense::backward(const Tensor& dy) {
    const int N = cached_input_.dim(0);
    if (dy.shape != std::vector<int>{N, units_}) throw ShapeError("dense: bad grad shape");

    Tensor dx({N, in_features_});
    for (int n = 0; n < N; ++n) {
        const float* dyrow = &dy.at2(n, 0);
        const float* irow = &cached_input_.at2(n, 0);
        for (int u = 0; u < units_; ++u) dbias_.data[u] += dyrow[u];
        float* dxrow = &dx.at2(n, 0);
        for (int f = 0; f < in_features_; ++f) {
            const float xv = irow[f];
            float* dwrow = &dweights_.at2(f, 0);
            const float* wrow = &weights_.at2(f, 0);
            float acc = 0.f;
            for (int u = 0; u < units_; ++u) {
                dwrow[u] += xv * dyrow[u];
                acc += wrow[u] * dyrow[u];
            }
            dxrow[f] = acc;
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(float rate) : rate_(rate) {
    if (rate < 0.f || rate >= 1.f) throw InvalidArgument("dropout rate must be in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, Mode mode, Rng& rng) {
    if (mode == Mode::Eval) return x;
    if (rate_ == 0.f) {
        cached_scale_.assign(x.numel(), 1.f);
        return x;
    }
    const float keep_scale = 1.f / (1.f - rate_);
    cached_scale_.resize(x.numel());
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const float s = rng.bernoulli(rate_) ? 0.f : keep_scale;
        cached_scale_[i] = s;
        out.data[i] = x.data[i] * s;
    }
    return out;
}

Tensor Dropout::backward(const Tensor& dy) {
    Tensor dx(dy.shape);
    for (std::size_t i = 0; i < dy.numel(); ++i) dx.data[i] = dy.data[i] * cached_scale_[i];
    return dx;
}

// ---------------------------------------------------------------------------
// Flatten

Tensor Flatten::forward(const Tensor& x, Mode mode, Rng&) {
    if (mode == Mode::Train) in_shape_ = x.shape;
    const int N = x.dim(0);
    Tensor out = x;
    out.shape = {N, static_cast<int>(x.numel()) / N};
    return out;
}

Tensor Flatten::backward(const Tensor& dy) {
    Tensor dx = dy;
    dx.shape = in_shape_;
    return dx;
}

// ---------------------------------------------------------------------------
// UpSample2

Tensor UpSample2::forward(const Tensor& x, Mode mode, Rng&) {
    require_4d(x, "upsample2");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (mode == Mode::Train) in_shape_ = x.shape;

    Tensor out({N, C, 2 * H, 2 * W});
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            for (int y = 0; y < H; ++y) {
                for (int x2 = 0; x2 < W; ++x2) {
                    const float v = x.at4(n, c, y, x2);
                    out.at4(n, c, 2 * y, 2 * x2) = v;
                    out.at4(n, c, 2 * y, 2 * x2 + 1) = v;
                    out.at4(n, c, 2 * y + 1, 2 * x2) = v;
                    out.at4(n, c, 2 * y + 1, 2 * x2 + 1) = v;
                }
            }
        }
    }
    return out;
}

Tensor UpSample2::backward(const Tensor& dy) {
    Tensor dx(in_shape_);
    const int N = dx.dim(0), C = dx.dim(1), H = dx.dim(2), W = dx.dim(3);
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            for (int y = 0; y < H; ++y) {
                for (int x2 = 0; x2 < W; ++x2) {
                    dx.at4(n, c, y, x2) = dy.at4(n, c, 2 * y, 2 * x2) +
                                          dy.at4(n, c, 2 * y, 2 * x2 + 1) +
                                          dy.at4(n, c, 2 * y + 1, 2 * x2) +
                                          dy.at4(n, c, 2 * y + 1, 2 * x2 + 1);
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Concat

Tensor Concat::forward(const Tensor&, Mode, Rng&) {
    throw Error("concat: use forward2 (two-input node)");
}

Tensor Concat::backward(const Tensor&) {
    throw Error("concat: use backward2 (two-input node)");
}

Tensor Concat::forward2(const Tensor& a, const Tensor& b, Mode mode) {
    require_4d(a, "concat");
    require_4d(b, "concat");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
        throw ShapeError("concat: N/H/W mismatch");
    }
    const int N = a.dim(0), H = a.dim(2), W = a.dim(3);
    const int ac = a.dim(1), bc = b.dim(1);
    if (mode == Mode::Train) {
        a_channels_ = ac;
        b_channels_ = bc;
    }

    Tensor out({N, ac + bc, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int n = 0; n < N; ++n) {
        std::copy_n(&a.at4(n, 0, 0, 0), ac * plane, &out.at4(n, 0, 0, 0));
        std::copy_n(&b.at4(n, 0, 0, 0), bc * plane, &out.at4(n, ac, 0, 0));
    }
    return out;
}

std::pair<Tensor, Tensor> Concat::backward2(const Tensor& dy) {
    const int N = dy.dim(0), H = dy.dim(2), W = dy.dim(3);
    Tensor da({N, a_channels_, H, W});
    Tensor db({N, b_channels_, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int n = 0; n < N; ++n) {
        std::copy_n(&dy.at4(n, 0, 0, 0), a_channels_ * plane, &da.at4(n, 0, 0, 0));
        std::copy_n(&dy.at4(n, a_channels_, 0, 0), b_channels_ * plane, &db.at4(n, 0, 0, 0));
    }
    return {std::move(da), std::move(db)};
}

}  // namespace ctpipe
