#include "ctpipe/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace ctpipe {

CtScan load_scan(const ScanEntry& entry) {
    CtScan scan;
    scan.scan_id = entry.scan_id;
    scan.slices = read_scan_slices(entry.path);
    scan.label = entry.label;
    return scan;
}

void validate(const SliceFilterPolicy& policy) {
    std::size_t prev = policy.primary_threshold;
    for (std::size_t t : policy.fallbacks) {
        if (t >= prev) throw InvalidArgument("slice filter thresholds must be strictly decreasing");
        prev = t;
    }
}

std::size_t filter_preset(const std::string& name) {
    if (name == "45x45") return 2025;
    if (name == "42x42") return 1764;
    if (name == "40x40") return 1600;
    throw InvalidArgument("unknown filter preset: " + name);
}

CtScan filter_slices(const CtScan& scan, const SliceFilterPolicy& policy,
                     std::size_t* threshold_used) {
    validate(policy);

    std::vector<std::size_t> thresholds = {policy.primary_threshold};
    thresholds.insert(thresholds.end(), policy.fallbacks.begin(), policy.fallbacks.end());

    std::vector<std::size_t> counts(scan.slices.size());
    for (std::size_t i = 0; i < scan.slices.size(); ++i) counts[i] = count_nondark(scan.slices[i]);

    for (std::size_t t : thresholds) {
        CtScan kept{scan.scan_id, {}, scan.label};
        for (std::size_t i = 0; i < scan.slices.size(); ++i) {
            if (counts[i] >= t) kept.slices.push_back(scan.slices[i]);
        }
        if (!kept.slices.empty()) {
            if (threshold_used) *threshold_used = t;
            return kept;
        }
    }
    if (policy.keep_all_if_empty) {
        if (threshold_used) *threshold_used = 0;
        return scan;
    }
    if (threshold_used) *threshold_used = thresholds.back();
    return {scan.scan_id, {}, scan.label};
}

PatientDecision classify_scan(const CtScan& scan, Sequential& clf, float slice_threshold) {
    if (scan.slices.empty()) throw InvalidArgument("classify_scan: empty scan");

    PatientDecision d;
    d.scan_id = scan.scan_id;
    d.slice_threshold = slice_threshold;
    d.n_slices_kept = scan.slices.size();

    std::size_t covid_votes = 0;
    for (const Image& slice : scan.slices) {
        const float p = predict_slice(clf, slice);
        d.slice_probs.push_back(p);
        covid_votes += p < slice_threshold;
    }
    d.covid_slice_fraction = double(covid_votes) / double(scan.slices.size());
    d.verdict = d.covid_slice_fraction >= 0.5 ? DiagLabel::Covid : DiagLabel::NonCovid;
    return d;
}

DiagLabel hybrid_vote(const std::vector<PatientDecision>& decisions) {
    if (decisions.size() != 3) throw InvalidArgument("hybrid_vote: need exactly 3 decisions");
    for (const auto& d : decisions) {
        if (d.scan_id != decisions[0].scan_id) {
            throw InvalidArgument("hybrid_vote: decisions are for different scans");
        }
    }
    int covid = 0;
    for (const auto& d : decisions) covid += d.verdict == DiagLabel::Covid;
    return covid >= 2 ? DiagLabel::Covid : DiagLabel::NonCovid;
}

namespace {

Mask segment_resized(const Image& resized, const PipelineOptions& options) {
    // A constant slice has nothing to threshold; treat it as lung-free
    // instead of failing the whole scan.
    switch (options.method) {
        case SegMethod::OtsuThreshold:
            try {
                return segment_otsu(resized);
            } catch (const DegenerateHistogram&) {
                return Mask(resized.width, resized.height);
            }
        case SegMethod::KMeans2:
            try {
                return segment_kmeans2(resized);
            } catch (const DegenerateHistogram&) {
                return Mask(resized.width, resized.height);
            }
        case SegMethod::RegionBased: {
            const auto seeds = options.region_seeds.empty()
                                   ? default_region_seeds(resized.width, resized.height)
                                   : options.region_seeds;
            return segment_region(resized, seeds, options.region_tol);
        }
        case SegMethod::UNet: {
            if (!options.unet) throw InvalidArgument("run_pipeline: UNet method without a model");
            return predict_mask(*options.unet, squeeze_intensity(resized));
        }
    }
    throw InvalidArgument("run_pipeline: unknown method");
}

}  // namespace

PatientDecision run_pipeline(const CtScan& scan, const PipelineOptions& options, Sequential& clf) {
    if (scan.slices.empty()) throw InvalidArgument("run_pipeline: empty scan");

    CtScan extracted{scan.scan_id, {}, scan.label};
    for (const Image& slice : scan.slices) {
        const Image resized = resize_bilinear(slice, options.input_size, options.input_size);
        const Mask raw = segment_resized(resized, options);
        extracted.slices.push_back(extract_lungs(resized, raw, options.extract));
    }

    std::size_t threshold_used = 0;
    const CtScan kept = filter_slices(extracted, options.policy, &threshold_used);

    PatientDecision d = classify_scan(kept, clf, options.slice_threshold);
    d.n_slices_in = scan.slices.size();
    d.threshold_used = threshold_used;
    return d;
}

std::vector<PatientDecision> run_pipeline_batch(const std::vector<CtScan>& scans,
                                                const PipelineOptions& options, Sequential& clf,
                                                int jobs) {
    if (jobs < 1) throw InvalidArgument("run_pipeline_batch: jobs must be >= 1");

    std::vector<PatientDecision> decisions(scans.size());
    if (jobs == 1) {
        for (std::size_t i = 0; i < scans.size(); ++i) {
            decisions[i] = run_pipeline(scans[i], options, clf);
        }
        return decisions;
    }

    // Eval-mode inference writes no layer state, so the models can be
    // shared; each scan is an independent, fully deterministic unit.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < scans.size(); i = next.fetch_add(1)) {
                    decisions[i] = run_pipeline(scans[i], options, clf);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return decisions;
}

void write_decisions_csv(const std::vector<PatientDecision>& decisions,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("decisions: cannot open " + path.string());
    out << "scan_id,n_slices_in,n_slices_kept,threshold_used,covid_slice_fraction,verdict\n";
    for (const auto& d : decisions) {
        out << d.scan_id << ',' << d.n_slices_in << ',' << d.n_slices_kept << ','
            << d.threshold_used << ',' << d.covid_slice_fraction << ','
            << diag_label_name(d.verdict) << '\n';
    }
    if (!out) throw IoError("decisions: write failed: " + path.string());
}

std::vector<PatientDecision> read_decisions_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("decisions: cannot open " + path.string());
    std::vector<PatientDecision> decisions;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("decisions: empty file: " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        PatientDecision d;
        std::getline(row, d.scan_id, ',');
        std::getline(row, field, ',');
        d.n_slices_in = std::stoul(field);
        std::getline(row, field, ',');
        d.n_slices_kept = std::stoul(field);
        std::getline(row, field, ',');
        d.threshold_used = std::stoul(field);
        std::getline(row, field, ',');
        d.covid_slice_fraction = std::stod(field);
        std::getline(row, field, ',');
        d.verdict = diag_label_from_name(field);
        decisions.push_back(std::move(d));
    }
    return decisions;
}

}  // namespace ctpipe
