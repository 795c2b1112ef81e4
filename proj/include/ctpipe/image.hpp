#ifndef CTPIPE_IMAGE_HPP_
#define CTPIPE_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ctpipe {

// 2-D grayscale raster, 8-bit intensities, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return pixels.size(); }

    bool operator==(const Image&) const = default;
};

// Binary raster aligned to an Image; true = foreground (lung).
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1

    Mask() = default;
    Mask(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return bits.size(); }
    std::size_t count() const;

    bool operator==(const Mask&) const = default;
};

// Intensity-squeezed raster, 32-bit floats in [0, 100].
struct NormImage {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    NormImage() = default;
    NormImage(int w, int h, float fill = 0.f)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Binary PGM (P5, maxval 255). Header comments are skipped on read; writes
// use the canonical "P5\n<w> <h>\n255\n" header so round trips are bit-exact.
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& img, const std::filesystem::path& path);

// Masks travel as PGM with foreground 255, background 0.
Image mask_to_image(const Mask& m);
Mask image_to_mask(const Image& img);
Mask read_mask_pgm(const std::filesystem::path& path);
void write_mask_pgm(const Mask& m, const std::filesystem::path& path);

// Bilinear resize with corner-aligned sampling, rounded to nearest and
// clamped to [0, 255].
Image resize_bilinear(const Image& img, int out_w, int out_h);

// Intensity squeeze: v * 100 / 255 as 32-bit float.
NormImage squeeze_intensity(const Image& img);

// Number of pixels with intensity > 0.
std::size_t count_nondark(const Image& img);

}  // namespace ctpipe

#endif
