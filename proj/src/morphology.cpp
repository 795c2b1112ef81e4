#include "ctpipe/morphology.hpp"

#include <cmath>
#include <deque>

#include "ctpipe/errors.hpp"

namespace ctpipe {

Disk::Disk(int r) : radius(r) {
    if (r < 1) throw InvalidArgument("disk radius must be >= 1");
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dx * dx + dy * dy <= r * r) offsets.emplace_back(dx, dy);
        }
    }
}

namespace {

// Flood fill over `grid` from the given starts, marking `visited`.
// Fills 4-connected runs of pixels whose grid value equals `match`.
void flood4(const std::vector<std::uint8_t>& grid, int w, int h, std::uint8_t match,
            std::deque<std::pair<int, int>>& queue, std::vector<std::uint8_t>& visited) {
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
            if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
            const std::size_t idx = static_cast<std::size_t>(ny[k]) * w + nx[k];
            if (visited[idx] || grid[idx] != match) continue;
            visited[idx] = 1;
            queue.emplace_back(nx[k], ny[k]);
        }
    }
}

}  // namespace

Mask clear_border(const Mask& m) {
    const int w = m.width, h = m.height;
    std::vector<std::uint8_t> border(m.size(), 0);
    std::deque<std::pair<int, int>> queue;
    auto push_if_fg = [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (m.bits[idx] && !border[idx]) {
            border[idx] = 1;
            queue.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_fg(x, 0);
        push_if_fg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_fg(0, y);
        push_if_fg(w - 1, y);
    }
    flood4(m.bits, w, h, 1, queue, border);

    Mask out(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) out.bits[i] = m.bits[i] && !border[i];
    return out;
}

Mask erode(const Mask& m, const Disk& d) {
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            bool keep = true;
            for (const auto& [dx, dy] : d.offsets) {
                const int px = x + dx, py = y + dy;
                if (px < 0 || px >= m.width || py < 0 || py >= m.height || !m.at(px, py)) {
                    keep = false;
                    break;
                }
            }
            out.at(x, y) = keep;
        }
    }
    return out;
}

Mask dilate(const Mask& m, const Disk& d) {
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            for (const auto& [dx, dy] : d.offsets) {
                const int px = x + dx, py = y + dy;
                if (px >= 0 && px < m.width && py >= 0 && py < m.height) out.at(px, py) = 1;
            }
        }
    }
    return out;
}

Mask close(const Mask& m, const Disk& d) {
    // Work on a plane padded by the radius: dilation may legitimately grow
    // past the window, and the erosion that follows needs to see that
    // growth or border foreground would be eaten away.
    const int r = d.radius;
    Mask padded(m.width + 2 * r, m.height + 2 * r);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) padded.at(x + r, y + r) = m.at(x, y);
    }
    const Mask closed = erode(dilate(padded, d), d);
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) out.at(x, y) = closed.at(x + r, y + r);
    }
    return out;
}

Mask roberts_edges(const NormImage& img, float edge_thresh) {
    Mask out(img.width, img.height);
    const float t2 = edge_thresh * edge_thresh;
    auto v = [&](int x, int y) -> float {
        return (x < img.width && y < img.height) ? img.at(x, y) : 0.f;
    };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float g1 = v(x, y) - v(x + 1, y + 1);
            const float g2 = v(x + 1, y) - v(x, y + 1);
            out.at(x, y) = g1 * g1 + g2 * g2 > t2;
        }
    }
    return out;
}

Mask fill_holes(const Mask& m) {
    const int w = m.width, h = m.height;
    std::vector<std::uint8_t> outside(m.size(), 0);
    std::deque<std::pair<int, int>> queue;
    auto push_if_bg = [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (!m.bits[idx] && !outside[idx]) {
            outside[idx] = 1;
            queue.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_bg(x, 0);
        push_if_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_bg(0, y);
        push_if_bg(w - 1, y);
    }
    flood4(m.bits, w, h, 0, queue, outside);

    Mask out(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) out.bits[i] = m.bits[i] || !outside[i];
    return out;
}

Image overlay(const Image& img, const Mask& m) {
    if (img.width != m.width || img.height != m.height) {
        throw InvalidArgument("overlay: image and mask dimensions differ");
    }
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i] = m.bits[i] ? img.pixels[i] : 0;
    }
    return out;
}

Mask cleanup_mask(const Mask& raw, const ExtractParams& params) {
    Mask m = clear_border(raw);
    m = erode(m, Disk(params.erode_radius));
    m = close(m, Disk(params.close_radius));

    // Roberts step: the edge map of the mask (rendered 0/100) is OR'd back
    // in so that hole filling closes edge-bounded contours.
    NormImage rendered(m.width, m.height);
    for (std::size_t i = 0; i < m.size(); ++i) rendered.values[i] = m.bits[i] ? 100.f : 0.f;
    const Mask edges = roberts_edges(rendered, params.edge_thresh);
    for (std::size_t i = 0; i < m.size(); ++i) m.bits[i] |= edges.bits[i];

    return fill_holes(m);
}

Image extract_lungs(const Image& img, const Mask& raw, const ExtractParams& params) {
    if (img.width != raw.width || img.height != raw.height) {
        throw InvalidArgument("extract_lungs: image and mask dimensions differ");
    }
    return overlay(img, cleanup_mask(raw, params));
}

}  // namespace ctpipe
