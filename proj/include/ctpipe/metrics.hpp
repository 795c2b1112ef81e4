#ifndef CTPIPE_METRICS_HPP_
#define CTPIPE_METRICS_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ctpipe/image.hpp"

namespace ctpipe {

// 2|A∩B| / (|A|+|B|); two empty masks count as perfect agreement (1.0).
double dice(const Mask& a, const Mask& b);

// (mean, min) of per-pair dice over (predicted, truth) pairs.
std::pair<double, double> dice_summary(const std::vector<std::pair<Mask, Mask>>& pairs);

// Confusion counts with COVID as the positive class.
struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

// predicted[i] / truth[i]: true = COVID.
ConfusionCounts confusion(const std::vector<bool>& predicted, const std::vector<bool>& truth);

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1_positive = 0.0;
    double f1_negative = 0.0;
    double macro_f1 = 0.0;
    double ci_halfwidth = 0.0;
};

// Derived metrics; any zero-denominator metric is reported as 0.0 so
// macro F1 stays defined. ci_halfwidth is the Wald interval of macro_f1
// over the report's sample count.
MetricsReport report(const ConfusionCounts& c);

// Wald half-width: z * sqrt(score * (1-score) / n).
double wald_ci(double score, long n, double z = 1.96);

std::string metrics_table(const ConfusionCounts& c, const MetricsReport& r);
void write_metrics_csv(const ConfusionCounts& c, const MetricsReport& r,
                       const std::filesystem::path& path);

// Dice summary CSV: method,avg_dice,min_dice.
void write_dice_csv(const std::string& method, double avg, double min,
                    const std::filesystem::path& path);

}  // namespace ctpipe

#endif
