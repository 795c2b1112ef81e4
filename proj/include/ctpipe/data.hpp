#ifndef CTPIPE_DATA_HPP_
#define CTPIPE_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctpipe/image.hpp"

namespace ctpipe {

enum class DiagLabel { Covid, NonCovid };

const char* diag_label_name(DiagLabel l);
DiagLabel diag_label_from_name(const std::string& name);

struct ScanEntry {
    std::string scan_id;
    std::filesystem::path path;
    std::optional<DiagLabel> label;
};

// One partition of a dataset on disk. Layout:
//   root/covid/<scan_id>/*.pgm and root/non-covid/<scan_id>/*.pgm, or
//   root/<scan_id>/*.pgm for unlabeled test partitions.
// Slice order within a scan is the lexicographic filename order.
struct DatasetIndex {
    std::string partition;
    std::vector<ScanEntry> entries;
    std::vector<std::string> issues;  // non-fatal problems (e.g. empty scan folders)
};

DatasetIndex index_dataset(const std::filesystem::path& root, const std::string& partition = "");

// Slices of one scan directory, lexicographic order.
std::vector<Image> read_scan_slices(const std::filesystem::path& scan_dir);
std::vector<std::filesystem::path> list_slice_files(const std::filesystem::path& scan_dir);

// Public segmentation volumes split: t0/t1 -> test, the rest -> train.
std::pair<std::vector<std::string>, std::vector<std::string>> split_public_seg(
    const std::vector<std::string>& volumes);

// Synthetic chest phantom: bright body ellipse on a brighter exterior, two
// dark lung ellipses, and (for the COVID class) a few bright lesion blobs
// kept inside the lungs. Intensities are chosen so the lungs are the only
// dark population and two-class intensity clustering recovers them.
struct PhantomSpec {
    std::uint64_t rng_seed = 7;
    int image_size = 64;
    int scans_per_class = 3;
    int min_slices = 4;
    int max_slices = 8;
    // Geometry as fractions of image_size; lungs sit at (0.5 +/- lung_dx, 0.5).
    double body_rx = 0.46;
    double body_ry = 0.44;
    double lung_rx = 0.16;
    double lung_ry = 0.26;
    double lung_dx = 0.20;
    int exterior_value = 205;
    int body_value = 180;
    int lung_value = 30;
    int lesion_count_min = 1;
    int lesion_count_max = 3;
    int lesion_value_lo = 120;
    int lesion_value_hi = 160;
    double lesion_r_lo = 0.03;
    double lesion_r_hi = 0.05;
    double noise_sigma = 0.0;
};

void validate(const PhantomSpec& spec);

// key=value round trip of a spec.
void write_phantom_spec(const PhantomSpec& spec, const std::filesystem::path& path);
PhantomSpec read_phantom_spec(const std::filesystem::path& path);

struct PhantomScanInfo {
    std::string scan_id;
    DiagLabel label;
    int n_slices = 0;
    std::vector<int> lesions_per_slice;
};

struct PhantomSummary {
    std::vector<PhantomScanInfo> scans;
};

// Writes out_root/{covid,non-covid}/<scan>/NNNN.pgm, ground-truth lung
// masks under out_root/masks/<scan>/, a labels.csv, and the spec as
// key=value. Fully determined by spec.rng_seed.
PhantomSummary generate_phantoms(const PhantomSpec& spec, const std::filesystem::path& out_root);

// The ground-truth lung mask of the phantom geometry (same for every slice).
Mask phantom_lung_mask(const PhantomSpec& spec);

}  // namespace ctpipe

#endif
