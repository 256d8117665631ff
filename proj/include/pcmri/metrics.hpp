#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcmri {

struct ConfusionMatrix {
    long tn = 0;
    long fp = 0;
    long fn = 0;
    long tp = 0;

    long total() const { return tn + fp + fn + tp; }
    std::string format() const;  // "TN / FP / FN / TP"
};

// Metrics are nullopt when their defining denominator is zero.
struct MetricSet {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> ppv;
    std::optional<double> npv;
    std::optional<double> f1;
    std::optional<double> auc;
};

struct ThresholdPolicy {
    enum class Kind { Fixed, SensitivityFloor };

    Kind kind = Kind::Fixed;
    double value = 0.5;  // Fixed: threshold; SensitivityFloor: minimum sensitivity

    static ThresholdPolicy fixed(double t = 0.5) { return {Kind::Fixed, t}; }
    static ThresholdPolicy sensitivity_floor(double s_min = 0.95) {
        return {Kind::SensitivityFloor, s_min};
    }
};

// Predict positive iff score >= threshold.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold);

MetricSet summarize(const ConfusionMatrix& cm);

// Mann-Whitney rank statistic, ties half-credited; equals trapezoidal ROC area.
double auc(std::span<const double> scores, std::span<const int> labels);

// Fixed: returns the configured threshold. SensitivityFloor: over candidate
// thresholds (midpoints between adjacent distinct scores plus below-min /
// above-max sentinels), the one with maximal specificity among those meeting
// the floor; ties broken toward the larger threshold.
double select_threshold(std::span<const double> val_scores, std::span<const int> val_labels,
                        const ThresholdPolicy& policy);

struct MeanSd {
    std::optional<double> mean;
    std::optional<double> sd;  // sample SD (n-1); nullopt when < 2 defined values
};

struct AggregateRow {
    MeanSd accuracy, sensitivity, specificity, ppv, npv, f1, auc;
};

// Per-metric mean and sample SD; undefined entries excluded pairwise.
AggregateRow aggregate(std::span<const MetricSet> rows);

}  // namespace pcmri
