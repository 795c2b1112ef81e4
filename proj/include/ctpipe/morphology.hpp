#ifndef CTPIPE_MORPHOLOGY_HPP_
#define CTPIPE_MORPHOLOGY_HPP_

#include <utility>
#include <vector>

#include "ctpipe/image.hpp"

namespace ctpipe {

// Disk structuring element: all (dx, dy) with dx^2 + dy^2 <= radius^2.
struct Disk {
    int radius;
    std::vector<std::pair<int, int>> offsets;

    explicit Disk(int r);
};

// Removes every 4-connected foreground component touching an image edge.
Mask clear_border(const Mask& m);

// Erosion: foreground iff every disk offset lands on foreground;
// out-of-bounds counts as background.
Mask erode(const Mask& m, const Disk& d);

// Dilation: union of disks around foreground pixels, clipped to the image.
Mask dilate(const Mask& m, const Disk& d);

// Closing: dilation then erosion, computed on a radius-padded plane so the
// result is extensive and idempotent on the image window.
Mask close(const Mask& m, const Disk& d);

// Roberts cross gradient magnitude thresholding. Kernels g1=[[1,0],[0,-1]],
// g2=[[0,1],[-1,0]] anchored at each pixel; x+1/y+1 reads past the
// bottom/right borders use zero padding.
Mask roberts_edges(const NormImage& img, float edge_thresh);

// Background components not 4-connected to the image border become
// foreground.
Mask fill_holes(const Mask& m);

// bitwise_and: image pixel where the mask is set, 0 elsewhere.
Image overlay(const Image& img, const Mask& m);

// Parameters of the post-processing chain; defaults match the reference
// chain (disk(2) erosion, disk(10) closing, edge threshold 10 on the 0-100
// scale).
struct ExtractParams {
    int erode_radius = 2;
    int close_radius = 10;
    float edge_thresh = 10.f;
};

// Full mask cleanup chain applied to a raw predicted mask, then overlaid:
// clear_border -> erode -> close -> (roberts edges of the mask OR the
// closed mask) -> fill_holes -> overlay.
Image extract_lungs(const Image& img, const Mask& raw, const ExtractParams& params = {});

// The cleaned mask alone (the chain above without the final overlay).
Mask cleanup_mask(const Mask& raw, const ExtractParams& params = {});

}  // namespace ctpipe

#endif
