#include "ctpipe/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "ctpipe/errors.hpp"
#include "ctpipe/rng.hpp"

namespace fs = std::filesystem;

namespace ctpipe {

const char* diag_label_name(DiagLabel l) {
    return l == DiagLabel::Covid ? "covid" : "non-covid";
}

DiagLabel diag_label_from_name(const std::string& name) {
    if (name == "covid") return DiagLabel::Covid;
    if (name == "non-covid" || name == "noncovid") return DiagLabel::NonCovid;
    throw InvalidArgument("unknown label: " + name);
}

namespace {

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace

std::vector<std::filesystem::path> list_slice_files(const std::filesystem::path& scan_dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scan_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Image> read_scan_slices(const std::filesystem::path& scan_dir) {
    std::vector<Image> slices;
    for (const auto& f : list_slice_files(scan_dir)) slices.push_back(read_pgm(f));
    return slices;
}

DatasetIndex index_dataset(const std::filesystem::path& root, const std::string& partition) {
    if (!fs::is_directory(root)) throw IoError("index_dataset: no such directory: " + root.string());

    DatasetIndex index;
    index.partition = partition;

    const bool labeled = fs::is_directory(root / "covid") || fs::is_directory(root / "non-covid");
    std::set<std::string> seen;
    auto add_scans = [&](const fs::path& base, std::optional<DiagLabel> label) {
        if (!fs::is_directory(base)) return;
        for (const std::string& scan_id : sorted_subdirs(base)) {
            const fs::path scan_dir = base / scan_id;
            if (!seen.insert(scan_id).second) {
                throw IndexError("index_dataset: duplicate scan id: " + scan_id);
            }
            if (list_slice_files(scan_dir).empty()) {
                index.issues.push_back("scan has no readable slices: " + scan_dir.string());
                continue;
            }
            index.entries.push_back({scan_id, scan_dir, label});
        }
    };

    if (labeled) {
        add_scans(root / "covid", DiagLabel::Covid);
        add_scans(root / "non-covid", DiagLabel::NonCovid);
        std::sort(index.entries.begin(), index.entries.end(),
                  [](const ScanEntry& a, const ScanEntry& b) { return a.scan_id < b.scan_id; });
    } else {
        for (const std::string& scan_id : sorted_subdirs(root)) {
            if (scan_id == "masks") continue;  // ground-truth sibling, not a scan
            const fs::path scan_dir = root / scan_id;
            if (list_slice_files(scan_dir).empty()) {
                index.issues.push_back("scan has no readable slices: " + scan_dir.string());
                continue;
            }
            index.entries.push_back({scan_id, scan_dir, std::nullopt});
        }
    }
    return index;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_public_seg(
    const std::vector<std::string>& volumes) {
    std::vector<std::string> train, test;
    for (const std::string& name : volumes) {
        if (name.size() < 2 || name[0] != 't' ||
            !std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(c); })) {
            throw InvalidArgument("split_public_seg: not a t<k> volume name: " + name);
        }
        const int k = std::stoi(name.substr(1));
        (k <= 1 ? test : train).push_back(name);
    }
    return {train, test};
}

// ---------------------------------------------------------------------------
// Phantom generation

namespace {

bool inside_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
}

struct Lesion {
    double cx, cy, r;
    int value;
};

}  // namespace

void validate(const PhantomSpec& spec) {
    if (spec.image_size < 16) throw InvalidArgument("phantom: image_size too small");
    if (spec.scans_per_class < 1) throw InvalidArgument("phantom: scans_per_class must be >= 1");
    if (spec.min_slices < 1 || spec.max_slices < spec.min_slices) {
        throw InvalidArgument("phantom: bad slice range");
    }
    if (spec.lesion_count_min < 1 || spec.lesion_count_max < spec.lesion_count_min) {
        throw InvalidArgument("phantom: bad lesion count range");
    }
    if (spec.lesion_r_hi < spec.lesion_r_lo || spec.lesion_r_hi >= std::min(spec.lung_rx, spec.lung_ry)) {
        throw InvalidArgument("phantom: lesions must fit inside the lungs");
    }
    // Both lung ellipses must lie inside the body ellipse.
    for (int deg = 0; deg < 360; ++deg) {
        const double a = deg * 3.14159265358979323846 / 180.0;
        const double x = spec.lung_dx + spec.lung_rx * std::cos(a);
        const double y = spec.lung_ry * std::sin(a);
        if (!inside_ellipse(x, y, 0.0, 0.0, spec.body_rx, spec.body_ry)) {
            throw InvalidArgument("phantom: lung ellipses extend outside the body");
        }
    }
}

Mask phantom_lung_mask(const PhantomSpec& spec) {
    const int s = spec.image_size;
    const double c = 0.5 * s;
    Mask m(s, s);
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const bool in_lung =
                inside_ellipse(px, py, c - spec.lung_dx * s, c, spec.lung_rx * s, spec.lung_ry * s) ||
                inside_ellipse(px, py, c + spec.lung_dx * s, c, spec.lung_rx * s, spec.lung_ry * s);
            m.at(x, y) = in_lung;
        }
    }
    return m;
}

namespace {

Image render_slice(const PhantomSpec& spec, const std::vector<Lesion>& lesions, Rng& rng) {
    const int s = spec.image_size;
    const double c = 0.5 * s;
    Image img(s, s);
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            int v = spec.exterior_value;
            if (inside_ellipse(px, py, c, c, spec.body_rx * s, spec.body_ry * s)) {
                v = spec.body_value;
                if (inside_ellipse(px, py, c - spec.lung_dx * s, c, spec.lung_rx * s,
                                   spec.lung_ry * s) ||
                    inside_ellipse(px, py, c + spec.lung_dx * s, c, spec.lung_rx * s,
                                   spec.lung_ry * s)) {
                    v = spec.lung_value;
                    for (const Lesion& l : lesions) {
                        const double dx = px - l.cx, dy = py - l.cy;
                        if (dx * dx + dy * dy <= l.r * l.r) {
                            v = l.value;
                            break;
                        }
                    }
                }
            }
            if (spec.noise_sigma > 0.0) {
                v = static_cast<int>(std::lround(v + spec.noise_sigma * rng.normal()));
            }
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return img;
}

std::vector<Lesion> draw_lesions(const PhantomSpec& spec, Rng& rng) {
    const int s = spec.image_size;
    const double c = 0.5 * s;
    const int n = spec.lesion_count_min +
                  static_cast<int>(rng.uniform_int(
                      static_cast<std::uint32_t>(spec.lesion_count_max - spec.lesion_count_min + 1)));
    std::vector<Lesion> lesions;
    for (int i = 0; i < n; ++i) {
        const double r = rng.uniform(spec.lesion_r_lo, spec.lesion_r_hi) * s;
        const bool left = rng.bernoulli(0.5);
        const double lcx = left ? c - spec.lung_dx * s : c + spec.lung_dx * s;
        // Rejection-sample a center such that the lesion disk (plus a one
        // pixel margin) stays inside the shrunken lung ellipse.
        const double margin = r + 1.5;
        const double rx = spec.lung_rx * s - margin;
        const double ry = spec.lung_ry * s - margin;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double u = rng.uniform(-1.0, 1.0);
            const double w = rng.uniform(-1.0, 1.0);
            if (u * u + w * w > 1.0) continue;
            lesions.push_back({lcx + u * rx, c + w * ry, r,
                               spec.lesion_value_lo +
                                   static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(
                                       spec.lesion_value_hi - spec.lesion_value_lo + 1)))});
            break;
        }
    }
    return lesions;
}

std::string zero_pad(int v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

PhantomSummary generate_phantoms(const PhantomSpec& spec, const std::filesystem::path& out_root) {
    validate(spec);
    fs::create_directories(out_root);
    write_phantom_spec(spec, out_root / "phantom_spec.txt");

    const Mask lung_mask = phantom_lung_mask(spec);
    Rng rng(spec.rng_seed);
    PhantomSummary summary;
    std::ofstream labels(out_root / "labels.csv", std::ios::trunc);
    labels << "scan_id,label\n";

    for (const DiagLabel label : {DiagLabel::Covid, DiagLabel::NonCovid}) {
        const std::string folder = diag_label_name(label);
        for (int i = 0; i < spec.scans_per_class; ++i) {
            PhantomScanInfo info;
            info.label = label;
            info.scan_id = (label == DiagLabel::Covid ? "covid_" : "noncov_") + zero_pad(i, 3);
            info.n_slices =
                spec.min_slices + static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(
                                      spec.max_slices - spec.min_slices + 1)));

            const fs::path scan_dir = out_root / folder / info.scan_id;
            const fs::path mask_dir = out_root / "masks" / info.scan_id;
            fs::create_directories(scan_dir);
            fs::create_directories(mask_dir);

            for (int slice = 0; slice < info.n_slices; ++slice) {
                std::vector<Lesion> lesions;
                if (label == DiagLabel::Covid) lesions = draw_lesions(spec, rng);
                info.lesions_per_slice.push_back(static_cast<int>(lesions.size()));
                const Image img = render_slice(spec, lesions, rng);
                const std::string name = zero_pad(slice, 4) + ".pgm";
                write_pgm(img, scan_dir / name);
                write_mask_pgm(lung_mask, mask_dir / name);
            }
            labels << info.scan_id << ',' << folder << '\n';
            summary.scans.push_back(std::move(info));
        }
    }
    if (!labels) throw IoError("phantom: failed writing labels.csv");
    return summary;
}

// ---------------------------------------------------------------------------
// key=value spec round trip

void write_phantom_spec(const PhantomSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("phantom spec: cannot open " + path.string());
    out << "# phantom dataset parameters\n";
    out << "rng_seed=" << spec.rng_seed << '\n';
    out << "image_size=" << spec.image_size << '\n';
    out << "scans_per_class=" << spec.scans_per_class << '\n';
    out << "min_slices=" << spec.min_slices << '\n';
    out << "max_slices=" << spec.max_slices << '\n';
    out << "body_rx=" << spec.body_rx << '\n';
    out << "body_ry=" << spec.body_ry << '\n';
    out << "lung_rx=" << spec.lung_rx << '\n';
    out << "lung_ry=" << spec.lung_ry << '\n';
    out << "lung_dx=" << spec.lung_dx << '\n';
    out << "exterior_value=" << spec.exterior_value << '\n';
    out << "body_value=" << spec.body_value << '\n';
    out << "lung_value=" << spec.lung_value << '\n';
    out << "lesion_count_min=" << spec.lesion_count_min << '\n';
    out << "lesion_count_max=" << spec.lesion_count_max << '\n';
    out << "lesion_value_lo=" << spec.lesion_value_lo << '\n';
    out << "lesion_value_hi=" << spec.lesion_value_hi << '\n';
    out << "lesion_r_lo=" << spec.lesion_r_lo << '\n';
    out << "lesion_r_hi=" << spec.lesion_r_hi << '\n';
    out << "noise_sigma=" << spec.noise_sigma << '\n';
}

PhantomSpec read_phantom_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("phantom spec: cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("phantom spec: bad line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    PhantomSpec spec;
    auto geti = [&](const char* k, int& v) {
        if (kv.count(k)) v = std::stoi(kv[k]);
    };
    auto getd = [&](const char* k, double& v) {
        if (kv.count(k)) v = std::stod(kv[k]);
    };
    if (kv.count("rng_seed")) spec.rng_seed = std::stoull(kv["rng_seed"]);
    geti("image_size", spec.image_size);
    geti("scans_per_class", spec.scans_per_class);
    geti("min_slices", spec.min_slices);
    geti("max_slices", spec.max_slices);
    getd("body_rx", spec.body_rx);
    getd("body_ry", spec.body_ry);
    getd("lung_rx", spec.lung_rx);
    getd("lung_ry", spec.lung_ry);
    getd("lung_dx", spec.lung_dx);
    geti("exterior_value", spec.exterior_value);
    geti("body_value", spec.body_value);
    geti("lung_value", spec.lung_value);
    geti("lesion_count_min", spec.lesion_count_min);
    geti("lesion_count_max", spec.lesion_count_max);
    geti("lesion_value_lo", spec.lesion_value_lo);
    geti("lesion_value_hi", spec.lesion_value_hi);
    getd("lesion_r_lo", spec.lesion_r_lo);
    getd("lesion_r_hi", spec.lesion_r_hi);
    getd("noise_sigma", spec.noise_sigma);
    validate(spec);
    return spec;
}

}  // namespace ctpipe
