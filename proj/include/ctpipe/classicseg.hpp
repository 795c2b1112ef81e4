#ifndef CTPIPE_CLASSICSEG_HPP_
#define CTPIPE_CLASSICSEG_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "ctpipe/image.hpp"

namespace ctpipe {

enum class SegMethod { RegionBased, OtsuThreshold, KMeans2, UNet };

const char* seg_method_name(SegMethod m);
SegMethod seg_method_from_name(const std::string& name);

// Otsu threshold t over the 256-bin histogram: maximizes between-class
// variance of the split {<= t} / {> t}; ties break toward the smaller t.
// Throws DegenerateHistogram on constant images.
int otsu_threshold(const Image& img);

// Foreground = pixels <= otsu threshold. Lungs are air-filled, so the
// darker class is the lung side in CT. Raw binarization, no cleanup.
Mask segment_otsu(const Image& img);

// 1-D Lloyd k-means (k=2) on intensities, centers initialized at the
// histogram min and max, foreground = lower-mean cluster. With that
// initialization the result does not depend on the seed; the parameter is
// reserved for future jitter. inertia_trace, when given, receives the sum
// of squared distances to the assigned center after each assignment step.
Mask segment_kmeans2(const Image& img, std::uint64_t seed = 0,
                     std::vector<double>* inertia_trace = nullptr);

// Seeded region growing, 4-connected, admitting pixels whose intensity is
// within tol of the running mean of the region grown so far; the result is
// the union over seeds.
Mask segment_region(const Image& img, const std::vector<std::pair<int, int>>& seeds, int tol);

// Typical lung centers used by the CLI when no seeds are given:
// (w/4, h/2) and (3w/4, h/2).
std::vector<std::pair<int, int>> default_region_seeds(int width, int height);

}  // namespace ctpipe

#endif
