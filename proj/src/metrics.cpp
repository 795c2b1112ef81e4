#include "ctpipe/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ctpipe/errors.hpp"

namespace ctpipe {

double dice(const Mask& a, const Mask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw InvalidArgument("dice: mask dimensions differ");
    }
    std::size_t inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        na += a.bits[i] != 0;
        nb += b.bits[i] != 0;
        inter += a.bits[i] && b.bits[i];
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * double(inter) / double(na + nb);
}

std::pair<double, double> dice_summary(const std::vector<std::pair<Mask, Mask>>& pairs) {
    if (pairs.empty()) throw InvalidArgument("dice_summary: empty pair list");
    double sum = 0.0, mn = 1.0;
    for (const auto& [pred, truth] : pairs) {
        const double d = dice(pred, truth);
        sum += d;
        mn = std::min(mn, d);
    }
    return {sum / double(pairs.size()), mn};
}

ConfusionCounts confusion(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
    if (predicted.size() != truth.size()) {
        throw InvalidArgument("confusion: prediction/truth lengths differ");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth[i]) {
            predicted[i] ? ++c.tp : ++c.fn;
        } else {
            predicted[i] ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

namespace {

double ratio(long num, long den) {
    return den > 0 ? double(num) / double(den) : 0.0;
}

double f1_from(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

MetricsReport report(const ConfusionCounts& c) {
    if (c.total() == 0) throw InvalidArgument("report: empty confusion matrix");

    MetricsReport r;
    r.accuracy = double(c.tp + c.tn) / double(c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.f1_positive = f1_from(r.precision, r.recall);
    const double neg_precision = ratio(c.tn, c.tn + c.fn);
    const double neg_recall = ratio(c.tn, c.tn + c.fp);
    r.f1_negative = f1_from(neg_precision, neg_recall);
    r.macro_f1 = (r.f1_positive + r.f1_negative) / 2.0;
    r.ci_halfwidth = wald_ci(r.macro_f1, c.total());
    return r;
}

double wald_ci(double score, long n, double z) {
    if (n <= 0) throw InvalidArgument("wald_ci: n must be positive");
    return z * std::sqrt(score * (1.0 - score) / double(n));
}

std::string metrics_table(const ConfusionCounts& c, const MetricsReport& r) {
    std::ostringstream out;
    out << "confusion   tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << "\n";
    out << "accuracy    " << r.accuracy << "\n";
    out << "precision   " << r.precision << "\n";
    out << "recall      " << r.recall << "\n";
    out << "f1 (covid)  " << r.f1_positive << "\n";
    out << "f1 (non)    " << r.f1_negative << "\n";
    out << "macro f1    " << r.macro_f1 << " +/- " << r.ci_halfwidth << " (95% Wald)\n";
    return out.str();
}

void write_metrics_csv(const ConfusionCounts& c, const MetricsReport& r,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("metrics: cannot open " + path.string());
    out << "tp,fp,tn,fn,accuracy,precision,recall,f1_positive,f1_negative,macro_f1,ci_halfwidth\n";
    out << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << ',' << r.accuracy << ','
        << r.precision << ',' << r.recall << ',' << r.f1_positive << ',' << r.f1_negative << ','
        << r.macro_f1 << ',' << r.ci_halfwidth << '\n';
}

void write_dice_csv(const std::string& method, double avg, double min,
                    const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("dice csv: cannot open " + path.string());
    out << "method,avg_dice,min_dice\n";
    out << method << ',' << avg << ',' << min << '\n';
}

}  // namespace ctpipe
