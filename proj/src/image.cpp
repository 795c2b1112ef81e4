#include "ctpipe/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctpipe/errors.hpp"

namespace ctpipe {

std::size_t Mask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b != 0;
    return n;
}

namespace {

// Next header token, skipping whitespace and '#' comments.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) {
        throw ParseError("pgm: malformed header in " + path.string());
    }
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1 << 30) throw ParseError("pgm: header value out of range in " + path.string());
        c = in.get();
    }
    // c is the single whitespace terminating the token (or EOF, caught later).
    return static_cast<int>(v);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("pgm: cannot open " + path.string());

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || m1 != '5') {
        throw ParseError("pgm: not a binary PGM (P5): " + path.string());
    }

    const int w = next_header_int(in, path);
    const int h = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (w <= 0 || h <= 0) throw ParseError("pgm: bad dimensions in " + path.string());
    if (maxval != 255) throw UnsupportedFormat("pgm: only maxval 255 supported, got " +
                                               std::to_string(maxval) + " in " + path.string());

    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.size()) {
        throw ParseError("pgm: truncated pixel data in " + path.string());
    }
    return img;
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("pgm: cannot open for write: " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.size()));
    out.flush();
    if (!out) throw IoError("pgm: write failed: " + path.string());
}

Image mask_to_image(const Mask& m) {
    Image img(m.width, m.height);
    for (std::size_t i = 0; i < m.bits.size(); ++i) img.pixels[i] = m.bits[i] ? 255 : 0;
    return img;
}

Mask image_to_mask(const Image& img) {
    Mask m(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] > 127 ? 1 : 0;
    return m;
}

Mask read_mask_pgm(const std::filesystem::path& path) {
    return image_to_mask(read_pgm(path));
}

void write_mask_pgm(const Mask& m, const std::filesystem::path& path) {
    write_pgm(mask_to_image(m), path);
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) {
        throw InvalidArgument("resize_bilinear: target dimensions must be positive");
    }
    if (out_w == img.width && out_h == img.height) return img;

    Image out(out_w, out_h);
    const double sx = out_w > 1 ? double(img.width - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? double(img.height - 1) / (out_h - 1) : 0.0;
    for (int y = 0; y < out_h; ++y) {
        const double fy = y * sy;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = x * sx;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
            const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
            const double v = (1.0 - wy) * top + wy * bot;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
        }
    }
    return out;
}

NormImage squeeze_intensity(const Image& img) {
    NormImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.values[i] = img.pixels[i] * 100.0f / 255.0f;
    }
    return out;
}

std::size_t count_nondark(const Image& img) {
    std::size_t n = 0;
    for (std::uint8_t p : img.pixels) n += p > 0;
    return n;
}

}  // namespace ctpipe
