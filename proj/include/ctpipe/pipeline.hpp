#ifndef CTPIPE_PIPELINE_HPP_
#define CTPIPE_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ctpipe/classicseg.hpp"
#include "ctpipe/classifier.hpp"
#include "ctpipe/data.hpp"
#include "ctpipe/morphology.hpp"
#include "ctpipe/unet.hpp"

namespace ctpipe {

struct CtScan {
    std::string scan_id;
    std::vector<Image> slices;
    std::optional<DiagLabel> label;
};

CtScan load_scan(const ScanEntry& entry);

// Slice-removal policy: keep slices with at least primary_threshold
// non-dark pixels; when nothing survives, retry with each fallback in
// order, and when even those leave nothing, keep_all_if_empty returns the
// scan unchanged (the test-time behaviour).
struct SliceFilterPolicy {
    std::size_t primary_threshold = 1764;  // 42x42
    std::vector<std::size_t> fallbacks = {1000, 500};
    bool keep_all_if_empty = true;
};

void validate(const SliceFilterPolicy& policy);

// Named threshold presets: "45x45" = 2025, "42x42" = 1764, "40x40" = 1600.
std::size_t filter_preset(const std::string& name);

// threshold_used, when given, receives the threshold that produced the
// result (0 when the keep-all branch fired).
CtScan filter_slices(const CtScan& scan, const SliceFilterPolicy& policy,
                     std::size_t* threshold_used = nullptr);

struct PatientDecision {
    std::string scan_id;
    std::vector<float> slice_probs;  // P(Non-COVID) per kept slice
    float slice_threshold = 0.5f;
    DiagLabel verdict = DiagLabel::NonCovid;
    double covid_slice_fraction = 0.0;
    std::size_t n_slices_in = 0;
    std::size_t n_slices_kept = 0;
    std::size_t threshold_used = 0;
};

// Per-slice P(Non-COVID) from the classifier; a slice votes COVID when its
// probability falls below slice_threshold, and the scan verdict is COVID
// when at least half the slices vote COVID (ties go to COVID).
PatientDecision classify_scan(const CtScan& scan, Sequential& clf, float slice_threshold);

// Majority verdict over exactly three per-method decisions for one scan.
DiagLabel hybrid_vote(const std::vector<PatientDecision>& decisions);

struct PipelineOptions {
    SegMethod method = SegMethod::KMeans2;
    UNet* unet = nullptr;  // required when method == UNet
    int input_size = 224;
    std::vector<std::pair<int, int>> region_seeds;  // empty: default lung centers
    int region_tol = 32;
    ExtractParams extract;
    SliceFilterPolicy policy;
    float slice_threshold = 0.5f;
};

// Whole workflow for one scan: resize -> intensity squeeze -> segmentation
// -> lung extraction -> slice removal -> classification. Constant slices
// (nothing to threshold) get an empty mask rather than an error so
// degenerate scans still reach the keep-all branch.
PatientDecision run_pipeline(const CtScan& scan, const PipelineOptions& options, Sequential& clf);

// Runs scans through run_pipeline on `jobs` worker threads; the output
// order (and content) is independent of the job count.
std::vector<PatientDecision> run_pipeline_batch(const std::vector<CtScan>& scans,
                                                const PipelineOptions& options, Sequential& clf,
                                                int jobs = 1);

// Decision CSV:
// scan_id,n_slices_in,n_slices_kept,threshold_used,covid_slice_fraction,verdict
void write_decisions_csv(const std::vector<PatientDecision>& decisions,
                         const std::filesystem::path& path);
std::vector<PatientDecision> read_decisions_csv(const std::filesystem::path& path);

}  // namespace ctpipe

#endif
