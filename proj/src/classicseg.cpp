#include "ctpipe/classicseg.hpp"

#include <array>
#include <cmath>
#include <deque>

#include "ctpipe/errors.hpp"

namespace ctpipe {

const char* seg_method_name(SegMethod m) {
    switch (m) {
        case SegMethod::RegionBased: return "region";
        case SegMethod::OtsuThreshold: return "otsu";
        case SegMethod::KMeans2: return "kmeans";
        case SegMethod::UNet: return "unet";
    }
    return "?";
}

SegMethod seg_method_from_name(const std::string& name) {
    if (name == "region") return SegMethod::RegionBased;
    if (name == "otsu") return SegMethod::OtsuThreshold;
    if (name == "kmeans") return SegMethod::KMeans2;
    if (name == "unet") return SegMethod::UNet;
    throw InvalidArgument("unknown segmentation method: " + name);
}

namespace {

std::array<std::size_t, 256> histogram(const Image& img) {
    std::array<std::size_t, 256> h{};
    for (std::uint8_t p : img.pixels) ++h[p];
    return h;
}

void require_two_levels(const std::array<std::size_t, 256>& h) {
    int distinct = 0;
    for (std::size_t c : h) distinct += c > 0;
    if (distinct < 2) throw DegenerateHistogram("image has fewer than two distinct intensities");
}

}  // namespace

int otsu_threshold(const Image& img) {
    const auto h = histogram(img);
    require_two_levels(h);

    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += double(v) * h[v];

    double best = -1.0;
    int best_t = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += h[t];
        sum0 += double(t) * h[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {  // strict: first (smallest) t wins ties
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

Mask segment_otsu(const Image& img) {
    const int t = otsu_threshold(img);
    Mask m(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] <= t ? 1 : 0;
    return m;
}

Mask segment_kmeans2(const Image& img, std::uint64_t /*seed*/, std::vector<double>* inertia_trace) {
    const auto h = histogram(img);
    require_two_levels(h);

    int lo = 0, hi = 255;
    while (h[lo] == 0) ++lo;
    while (h[hi] == 0) --hi;

    double c0 = lo, c1 = hi;
    int cut = -1;  // intensities <= cut belong to cluster 0
    for (int iter = 0; iter < 100; ++iter) {
        // 1-D assignment to the nearer center is a threshold at the midpoint;
        // equidistant values go to the lower cluster.
        const int new_cut = static_cast<int>(std::floor((c0 + c1) / 2.0));
        if (inertia_trace) {
            double inertia = 0.0;
            for (int v = 0; v < 256; ++v) {
                const double d = v <= new_cut ? v - c0 : v - c1;
                inertia += d * d * h[v];
            }
            inertia_trace->push_back(inertia);
        }
        if (new_cut == cut) break;
        cut = new_cut;

        double n0 = 0, s0 = 0, n1 = 0, s1 = 0;
        for (int v = 0; v < 256; ++v) {
            if (v <= cut) {
                n0 += h[v];
                s0 += double(v) * h[v];
            } else {
                n1 += h[v];
                s1 += double(v) * h[v];
            }
        }
        // The extreme-value initialization keeps both clusters non-empty.
        c0 = s0 / n0;
        c1 = s1 / n1;
    }

    // Foreground = lower-mean cluster (c0 by construction).
    Mask m(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] <= cut ? 1 : 0;
    return m;
}

Mask segment_region(const Image& img, const std::vector<std::pair<int, int>>& seeds, int tol) {
    if (seeds.empty()) throw InvalidArgument("segment_region: empty seed list");
    for (const auto& [sx, sy] : seeds) {
        if (sx < 0 || sx >= img.width || sy < 0 || sy >= img.height) {
            throw InvalidArgument("segment_region: seed out of bounds");
        }
    }

    Mask out(img.width, img.height);
    std::vector<std::uint8_t> in_region(img.size());
    for (const auto& [sx, sy] : seeds) {
        std::fill(in_region.begin(), in_region.end(), 0);
        std::deque<std::pair<int, int>> queue;
        queue.emplace_back(sx, sy);
        in_region[static_cast<std::size_t>(sy) * img.width + sx] = 1;
        double sum = img.at(sx, sy);
        std::size_t n = 1;

        while (!queue.empty()) {
            const auto [x, y] = queue.front();
            queue.pop_front();
            const double mean = sum / double(n);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < 0 || nx[k] >= img.width || ny[k] < 0 || ny[k] >= img.height) continue;
                const std::size_t idx = static_cast<std::size_t>(ny[k]) * img.width + nx[k];
                if (in_region[idx]) continue;
                if (std::abs(double(img.pixels[idx]) - mean) <= double(tol)) {
                    in_region[idx] = 1;
                    sum += img.pixels[idx];
                    ++n;
                    queue.emplace_back(nx[k], ny[k]);
                }
            }
        }
        for (std::size_t i = 0; i < in_region.size(); ++i) out.bits[i] |= in_region[i];
    }
    return out;
}

std::vector<std::pair<int, int>> default_region_seeds(int width, int height) {
    return {{width / 4, height / 2}, {3 * width / 4, height / 2}};
}

}  // namespace ctpipe
